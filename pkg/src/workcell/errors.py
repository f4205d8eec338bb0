"""Exception types shared across the workcell packages."""


class WorkcellError(Exception):
    """Base class for all workcell errors."""


# --- messaging ---

class DuplicateAid(WorkcellError):
    """An agent with this (name, platform) is already registered."""


class NotRegistered(WorkcellError):
    """The agent id is not currently registered."""


class SenderNotRegistered(WorkcellError):
    """send() was called with an unregistered sender."""


class UnknownReceiver(WorkcellError):
    """At least one receiver of a message is not registered."""


class TransportDown(UnknownReceiver):
    """A remote platform could not be reached over TCP."""


class ReceiveTimeout(WorkcellError):
    """No matching message arrived within the receive window."""


class WireFormatError(WorkcellError):
    """A frame could not be decoded into a message."""


# --- holon runtime ---

class AmbiguousFilters(WorkcellError):
    """Two behaviours of one holon can match the same message."""


class HandshakeError(WorkcellError):
    """Base class for inform/confirm handshake failures."""


class HandshakeTimeout(HandshakeError):
    """The peer did not confirm within the handshake window."""


class HandshakeRefused(HandshakeError):
    """The peer answered the handshake with a failure reply."""


# --- gesture ---

class InvalidFrame(WorkcellError):
    """A hand frame violates its geometric constraints."""


class OutOfOrderFrame(WorkcellError):
    """Frame ids in a stream must be strictly increasing."""


# --- worker holon ---

class AlreadyRegistered(WorkcellError):
    pass


class WorkerNotRegistered(WorkcellError):
    pass


class WorkerBusy(WorkcellError):
    pass


class WorkerUnavailableError(WorkcellError):
    pass


class IllegalTransition(WorkcellError):
    """A worker signal does not apply in the current task status."""


class NegativeDuration(WorkcellError):
    pass


# --- robot holon ---

class ArmBusy(WorkcellError):
    pass


class DuplicateTaskName(WorkcellError):
    pass


class JointLimit(WorkcellError):
    pass


class NotTeaching(WorkcellError):
    pass


class EmptyRecording(WorkcellError):
    pass


class UnknownTask(WorkcellError):
    pass


class MalformedCommand(WorkcellError):
    pass


# --- product holon ---

class DuplicateName(WorkcellError):
    pass


class NotFound(WorkcellError):
    pass


class RecipeInUse(WorkcellError):
    pass


class UnexpectedPropose(WorkcellError):
    pass


# --- order holon ---

class ExecutorBusy(WorkcellError):
    pass


class UnknownRobotTask(WorkcellError):
    pass


class NoActiveTask(WorkcellError):
    pass


class TeachingActive(WorkcellError):
    pass


# --- scenario harness ---

class ScriptStuck(WorkcellError):
    """A scenario script step could not be applied."""
