"""Error kinds raised by the engines.

Every failure carries a short machine-readable ``kind`` string so the CLI can
map it to a stable exit code and tests can assert on it.
"""

# kind -> CLI exit code (0 ok, 2 input problem, 3 size cap, 4 a check failed)
EXIT_CODES = {
    "PARSE_ERROR": 2,
    "DOMAIN": 2,
    "PRECONDITION": 2,
    "HAS_LOOP": 2,
    "ARITY": 2,
    "SPECIAL_POINT": 2,
    "NOT_IN_REGION": 2,
    "DEGENERATE": 2,
    "ZERO_DIVISOR": 2,
    "CONSTANT_TERM_ZERO": 2,
    "SINGULAR": 2,
    "TOO_LARGE": 3,
    "ESCAPE_CAP": 3,
    "PRECISION_EXHAUSTED": 3,
    "NOT_DIVISIBLE": 4,
    "NON_CONVERGENCE": 4,
    "DIVISIBILITY_VIOLATION": 4,
    "INDETERMINATE": 4,
    "CHECK_FAILED": 4,
    "VERIFICATION_FAILED": 4,
    "COVER_FAILED": 4,
    "NAVIGATION_STUCK": 4,
    "NEWTON_FAIL": 4,
    "NOT_IMPLEMENTING": 4,
}


class IsingLabError(Exception):
    """Base error; ``kind`` is one of the keys of ``EXIT_CODES``."""

    def __init__(self, kind: str, message: str = "", **details):
        if kind not in EXIT_CODES:
            raise ValueError(f"unknown error kind {kind!r}")
        self.kind = kind
        self.details = details
        super().__init__(f"{kind}: {message}" if message else kind)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.kind]


def fail(kind: str, message: str = "", **details):
    raise IsingLabError(kind, message, **details)
