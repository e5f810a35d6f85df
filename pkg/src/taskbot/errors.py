"""Exception types shared across the package."""


class TaskbotError(Exception):
    """Base class for all package errors."""


class SchemaSyntaxError(TaskbotError):
    def __init__(self, line, col, message):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class SemanticError(TaskbotError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class UnknownSlot(TaskbotError):
    def __init__(self, slot):
        super().__init__(f"unknown slot: {slot!r}")
        self.slot = slot


class EmptyDatabase(TaskbotError):
    pass


class ProtocolError(TaskbotError):
    pass


class FlowError(TaskbotError):
    pass


class ActSyntaxError(TaskbotError):
    pass


class MissingValue(TaskbotError):
    pass


class ValueNotFound(TaskbotError):
    pass


class TemplateFormatError(TaskbotError):
    pass


class IncompleteAnnotation(TaskbotError):
    pass


class FormatVersionMismatch(TaskbotError):
    pass


class SchemaDigestMismatch(Warning):
    """Corpus header digest differs from the active schema (warning by default)."""


class CorpusParseError(TaskbotError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


class NoSchemaLoaded(TaskbotError):
    pass


class ModelTimeout(TaskbotError):
    pass


class TransportError(TaskbotError):
    pass


class MalformedReply(TaskbotError):
    pass


class SchemaViolation(TaskbotError):
    pass


class DanglingReference(TaskbotError):
    pass


class StaleTurn(TaskbotError):
    pass


class UnknownSession(TaskbotError):
    pass


class SessionEnded(TaskbotError):
    pass


class EmptyCorpus(TaskbotError):
    pass


class AlignmentError(TaskbotError):
    pass


class EmptyInput(TaskbotError):
    pass
