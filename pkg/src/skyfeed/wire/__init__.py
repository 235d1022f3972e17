from .activation import (
    DenialReason,
    KeyFormatError,
    KeyVerdict,
    authorize,
    crc16_ccitt_false,
    generate_key,
    load_allowlist,
    validate_key,
)
from .protocol import (
    AckStatus,
    CrcMismatchError,
    HelloAck,
    MessageKind,
    ProtocolError,
    TruncatedStreamError,
    UnknownKindError,
    WireMessage,
    crc32,
    decode_message,
    encode_message,
)
from .transport import (
    ActivationDenied,
    FeedConnection,
    FeedServer,
    HandshakeTimeout,
    ServerConfig,
    SessionSummary,
    connect_session,
    serve_session,
)
