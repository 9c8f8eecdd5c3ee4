"""Exception hierarchy shared across the gateway packages.

Every error carries a stable ``code`` (the class name unless overridden),
which is what ends up in job envelopes and wire responses.
"""


class ItsgwError(Exception):
    """Base for all gateway errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class SchemaMismatch(ItsgwError):
    pass


class NonFiniteValue(ItsgwError):
    pass


class LabelOutOfRange(ItsgwError):
    pass


class IllegalTransition(ItsgwError):
    pass


class ShapeMismatch(ItsgwError):
    pass


class ValidationFailed(ItsgwError):
    """Payload rejected before a job was created."""


class BackendTimeout(ItsgwError):
    """External backend did not answer within the configured window."""


class BackendProtocolError(ItsgwError):
    """External backend broke the wire protocol framing."""


class BackendRemoteError(ItsgwError):
    """External backend answered with an err frame (it stayed in protocol)."""

    def __init__(self, remote_code: str, message: str) -> None:
        super().__init__(f"{remote_code}: {message}")
        self.remote_code = remote_code
        self.remote_message = message
