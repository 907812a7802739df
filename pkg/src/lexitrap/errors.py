"""Exception hierarchy shared across the package."""


class LexitrapError(Exception):
    """Base class for all errors raised by this package."""


class VocabLoadError(LexitrapError):
    """Vocabulary file is malformed or does not satisfy its invariants."""


class VocabSaveError(LexitrapError):
    """Vocabulary state cannot be serialized under the requested format."""


class EditError(LexitrapError):
    """A dictionary edit violates its preconditions (range, special token)."""


class EmbeddingError(LexitrapError):
    """Embedding file is malformed or a query violates its preconditions."""


class PlanError(LexitrapError):
    """An attack plan cannot be built or applied against this vocabulary."""
