"""Exception hierarchy.

Errors fall in two families that the CLI maps to different exit codes:
input/config problems (``ConfigError``) and gaps in the data tables
(``DataError``).
"""


class TracerError(Exception):
    pass


class ConfigError(TracerError):
    pass


class DataError(TracerError):
    pass


class ParseError(ConfigError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class UnknownGate(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class BadQubitIndex(ParseError):
    def __init__(self, line: int, msg: str = "qubit index out of range"):
        super().__init__(line, msg)


class EmptyCircuit(ConfigError):
    def __init__(self):
        super().__init__("circuit text contains no statements")


class InvalidPolicy(ConfigError):
    pass


class ZeroOrig(ConfigError):
    def __init__(self):
        super().__init__("savings undefined for a circuit with zero gate positions")


class NoDecomposition(DataError):
    def __init__(self, gate: str, tech: str):
        super().__init__(f"no decomposition of {gate!r} for technology {tech}")
        self.gate = gate
        self.tech = tech


class MissingEntry(DataError, KeyError):
    def __init__(self, tech: str, gate: str, table: str = "table"):
        DataError.__init__(self, f"{table} has no entry for ({tech}, {gate})")
        self.tech = tech
        self.gate = gate

    def __str__(self):
        return self.args[0]


class MissingFormula(DataError, KeyError):
    def __init__(self, code: str, gate: str):
        DataError.__init__(self, f"no logical-level formula for {gate!r} in {code}")
        self.code = code
        self.gate = gate

    def __str__(self):
        return self.args[0]


class TooManyEvents(TracerError, ValueError):
    pass
