"""Errors raised when an action cannot be applied to a graph."""


class InvalidTarget(Exception):
    reason = "InvalidTarget"
