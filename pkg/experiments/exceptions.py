class ExperimentError(Exception):
    """Base class for experiment setup failures."""


class ConfigFileError(ExperimentError):
    """A --config file line that is not key=value."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def format_errors(errors) -> str:
    parts = []
    for field, messages in errors.items():
        if isinstance(messages, (list, tuple)):
            messages = '; '.join(str(message) for message in messages)
        parts.append(str(messages) if field == 'non_field_errors' else f"{field}: {messages}")
    return ', '.join(parts)
