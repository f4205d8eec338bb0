"""ACL message envelope and its wire encoding.

A message is one header line followed by content lines and a blank
terminator:

    performative|sender|receivers|conversation_id|seq|sent_at
    content=<kind>
    key=value
    ...
    <blank>

The first content line carries the payload kind ("content" is a reserved
key, never a payload entry). Entry keys are a closed set and always
serialize in one fixed order, so two equal messages produce identical
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional

from workcell.errors import WireFormatError


class Performative(Enum):
    """Communicative act carried by a message."""

    INFORM = "inform"
    CONFIRM = "confirm"
    AGREE = "agree"
    PROPOSE = "propose"
    ACCEPT_PROPOSAL = "accept-proposal"
    REJECT_PROPOSAL = "reject-proposal"
    REQUEST = "request"
    FAILURE = "failure"

    @classmethod
    def decode(cls, token: str) -> "Performative":
        for p in cls:
            if p.value == token:
                return p
        raise WireFormatError(f"unknown performative: {token!r}")


class ContentKind(Enum):
    """Shape of a message payload."""

    TASK_DETAILS = "task-details"
    TASK_NAME = "task-name"
    CONSTRAINT_TEXT = "constraint-text"
    STATUS_TEXT = "status-text"
    EMPTY = "empty"

    @classmethod
    def decode(cls, token: str) -> "ContentKind":
        for k in cls:
            if k.value == token:
                return k
        raise WireFormatError(f"unknown content kind: {token!r}")


# Fixed serialization order for payload entries.
ENTRY_KEYS = ("task_name", "kind", "arm", "description", "order_id", "step_index", "text")

_ID_FORBIDDEN = set("@|,\n\r")


def _check_ident(value: str, what: str) -> str:
    if not value:
        raise ValueError(f"{what} must be non-empty")
    if any(c in _ID_FORBIDDEN for c in value):
        raise ValueError(f"{what} contains a reserved character: {value!r}")
    return value


@dataclass(frozen=True)
class AgentId:
    """Unique agent address, rendered as name@platform."""

    name: str
    platform: str

    def __post_init__(self):
        _check_ident(self.name, "agent name")
        _check_ident(self.platform, "platform name")

    def __str__(self) -> str:
        return f"{self.name}@{self.platform}"

    @classmethod
    def parse(cls, text: str) -> "AgentId":
        name, sep, platform = text.partition("@")
        if not sep:
            raise WireFormatError(f"agent id missing platform: {text!r}")
        return cls(name, platform)


@dataclass(frozen=True)
class ContentPayload:
    """Typed key/value payload, serialized in fixed key order."""

    kind: ContentKind
    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ordered = {}
        for key in ENTRY_KEYS:
            if key in self.entries:
                value = str(self.entries[key])
                if "\n" in value or "\r" in value:
                    raise ValueError(f"entry {key} contains a newline")
                ordered[key] = value
        unknown = set(self.entries) - set(ENTRY_KEYS)
        if unknown:
            raise ValueError(f"unknown payload keys: {sorted(unknown)}")
        object.__setattr__(self, "entries", ordered)
        self._validate()

    def _validate(self):
        if self.kind is ContentKind.TASK_DETAILS:
            for required in ("task_name", "kind", "step_index"):
                if required not in self.entries:
                    raise ValueError(f"task-details payload missing {required}")
            if self.entries["kind"] == "robot" and "arm" not in self.entries:
                raise ValueError("robot task-details payload missing arm")

    def get(self, key: str, default: str = "") -> str:
        return self.entries.get(key, default)

    @property
    def step_index(self) -> int:
        return int(self.entries["step_index"])

    # -- constructors --

    @classmethod
    def empty(cls) -> "ContentPayload":
        return cls(ContentKind.EMPTY)

    @classmethod
    def task_name(cls, name: str, **extra: str) -> "ContentPayload":
        return cls(ContentKind.TASK_NAME, {"task_name": name, **extra})

    @classmethod
    def status(cls, text: str, **extra: str) -> "ContentPayload":
        return cls(ContentKind.STATUS_TEXT, {"text": text, **extra})

    @classmethod
    def constraint(cls, text: str, **extra: str) -> "ContentPayload":
        return cls(ContentKind.CONSTRAINT_TEXT, {"text": text, **extra})

    @classmethod
    def task_details(cls, task_name: str, kind: str, step_index: int,
                     order_id: str = "", arm: str = "", description: str = "",
                     text: str = "") -> "ContentPayload":
        entries = {"task_name": task_name, "kind": kind, "step_index": str(step_index)}
        if arm:
            entries["arm"] = arm
        if description:
            entries["description"] = description
        if order_id:
            entries["order_id"] = order_id
        if text:
            entries["text"] = text
        return cls(ContentKind.TASK_DETAILS, entries)


@dataclass(frozen=True)
class AclMessage:
    """One typed message between agents.

    seq and sent_at are assigned by the bus at send time; messages built
    by hand carry zeros until then.
    """

    performative: Performative
    sender: AgentId
    receivers: tuple[AgentId, ...]
    conversation_id: str
    content: ContentPayload
    sent_at: int = 0
    seq: int = 0

    def __post_init__(self):
        if not self.receivers:
            raise ValueError("message needs at least one receiver")
        if not self.conversation_id:
            raise ValueError("conversation_id must be non-empty")
        if any(c in "|\n\r" for c in self.conversation_id):
            raise ValueError(f"conversation_id contains a reserved character: {self.conversation_id!r}")
        object.__setattr__(self, "receivers", tuple(self.receivers))

    def stamped(self, seq: int, sent_at: int) -> "AclMessage":
        return replace(self, seq=seq, sent_at=sent_at)


def message(performative: Performative, sender: AgentId,
            receivers: AgentId | Iterable[AgentId], conversation_id: str,
            content: Optional[ContentPayload] = None) -> AclMessage:
    """Convenience constructor accepting a single receiver."""
    if isinstance(receivers, AgentId):
        receivers = (receivers,)
    return AclMessage(performative, sender, tuple(receivers), conversation_id,
                      content or ContentPayload.empty())


def encode_message(msg: AclMessage) -> str:
    receivers = ",".join(str(r) for r in msg.receivers)
    header = "|".join([
        msg.performative.value,
        str(msg.sender),
        receivers,
        msg.conversation_id,
        str(msg.seq),
        str(msg.sent_at),
    ])
    lines = [header, f"content={msg.content.kind.value}"]
    for key, value in msg.content.entries.items():
        lines.append(f"{key}={value}")
    lines.append("")
    return "\n".join(lines) + "\n"


def decode_message(text: str) -> AclMessage:
    lines = text.split("\n")
    if len(lines) < 2:
        raise WireFormatError("message too short")
    fields = lines[0].split("|")
    if len(fields) != 6:
        raise WireFormatError(f"bad header field count: {len(fields)}")
    performative = Performative.decode(fields[0])
    sender = AgentId.parse(fields[1])
    receivers = tuple(AgentId.parse(r) for r in fields[2].split(",") if r)
    if not receivers:
        raise WireFormatError("message has no receivers")
    conversation_id = fields[3]
    try:
        seq, sent_at = int(fields[4]), int(fields[5])
    except ValueError as exc:
        raise WireFormatError(f"bad seq/sent_at: {exc}") from exc

    kind: Optional[ContentKind] = None
    entries: dict[str, str] = {}
    for line in lines[1:]:
        if line == "":
            break
        key, sep, value = line.partition("=")
        if not sep:
            raise WireFormatError(f"bad content line: {line!r}")
        if key == "content":
            kind = ContentKind.decode(value)
        elif key in ENTRY_KEYS:
            entries[key] = value
        else:
            raise WireFormatError(f"unknown content key: {key!r}")
    if kind is None:
        raise WireFormatError("missing content kind line")
    try:
        content = ContentPayload(kind, entries)
    except ValueError as exc:
        raise WireFormatError(str(exc)) from exc
    try:
        return AclMessage(performative, sender, receivers, conversation_id,
                          content, sent_at=sent_at, seq=seq)
    except ValueError as exc:
        raise WireFormatError(str(exc)) from exc
