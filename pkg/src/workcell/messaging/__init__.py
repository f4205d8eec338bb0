"""Typed agent messaging: envelope, bus, sniffer and TCP transport."""

from workcell.messaging.acl import (
    AgentId,
    AclMessage,
    ContentKind,
    ContentPayload,
    Performative,
    decode_message,
    encode_message,
)
from workcell.messaging.bus import (
    MessageBus,
    MessageFilter,
    Registration,
    SnifferRecord,
    TraceCollector,
)

__all__ = [
    "AgentId",
    "AclMessage",
    "ContentKind",
    "ContentPayload",
    "Performative",
    "decode_message",
    "encode_message",
    "MessageBus",
    "MessageFilter",
    "Registration",
    "SnifferRecord",
    "TraceCollector",
]
