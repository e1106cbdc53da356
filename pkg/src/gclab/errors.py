"""Error types shared by the parsers, checkers and evaluators."""


class SourceError(Exception):
    """A problem tied to a position in source text."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"line {self.line}, col {self.col}: {self.message}"


class ParseError(SourceError):
    """Tokenizer or grammar error."""


class CheckError(SourceError):
    """Name-resolution or type error: undeclared identifier, duplicate
    declaration, ill-typed expression, violated structural invariant."""


class EvalError(Exception):
    """Runtime evaluation failure.

    Not a user-facing error: the execution engines convert it into a
    failure outcome. `reason` is the outcome's failure class, either
    'eval-error' (out-of-bounds index, div/mod by zero, bad choice bound)
    or 'aliasing' (parallel-assignment targets collide at runtime).
    """

    def __init__(self, detail: str, reason: str = "eval-error"):
        self.detail = detail
        self.reason = reason
        super().__init__(detail)
