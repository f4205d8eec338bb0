"""Simulated dual-arm robot: body, bridge endpoints and agents."""

from workcell.robot.body import (
    ArmId,
    ArmMode,
    ExecutionReport,
    Gripper,
    MotionProfile,
    ProfileStore,
    RobotBody,
    Waypoint,
)

__all__ = [
    "ArmId",
    "ArmMode",
    "ExecutionReport",
    "Gripper",
    "MotionProfile",
    "ProfileStore",
    "RobotBody",
    "Waypoint",
]
