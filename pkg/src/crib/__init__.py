"""Creative invention benchmark.

Five problem families (painting, alien language, photobash, narrative,
dessert recipes) share one protocol: an agent sees a knowledge base, builds a
submission with ``apply``, may invent new elements with ``combine``, and gets
a score against a goal it never sees.
"""

from crib.core import DEFAULT_BUDGET, DOMAINS, Problem, Session, get_domain, open_session, replay
from crib.errors import (
    BudgetExceeded,
    CribError,
    GenerationError,
    InvalidAction,
    InvalidCombination,
    InvalidReference,
    VerificationError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BUDGET", "DOMAINS", "Problem", "Session", "get_domain", "open_session", "replay",
    "BudgetExceeded", "CribError", "GenerationError", "InvalidAction", "InvalidCombination",
    "InvalidReference", "VerificationError",
]
