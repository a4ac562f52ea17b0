# -*- coding: utf-8 -*-
"""
ca2n.core.exceptions
~~~~~~~~~~~~~~~~~~~~

Exceptions raised by ca2n, forms the root of all exceptions in
ca2n. Every exception carries a ``category`` which the command line
reports verbatim so failures stay machine-parsable.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details
"""


class BaseCA2NError(Exception):
    """
    Root exception for ca2n.
    """

    category = "error"


class ValidationError(BaseCA2NError, ValueError):
    """
    Used to signal rejected input, such as mismatching tensor shapes,
    regions outside of a frame or violated preconditions.

    :param str attribute: The argument or attribute the error applies to.
    :param str reason: Why the input is invalid, naming the offending
        dimensions where there are any.
    """

    category = "rejected-input"

    def __init__(self, attribute, reason):
        self.attribute = attribute
        self.reason = reason
        super(ValidationError, self).__init__((attribute, reason))

    def __str__(self):
        return "{}: {}".format(self.attribute, self.reason)


class ConfigurationError(BaseCA2NError):
    """
    Raised for invalid settings, unknown configuration keys and missing
    inputs such as an absent checkpoint or an empty data directory.
    """

    category = "configuration"


class DecodeError(BaseCA2NError):
    """
    Raised when an image file cannot be decoded.

    :param path: The file that failed to decode.
    :param int offset: Byte offset at which decoding failed.
    :param str reason: What was wrong at that offset.
    """

    category = "decode"

    def __init__(self, path, offset, reason):
        self.path = path
        self.offset = offset
        self.reason = reason
        super(DecodeError, self).__init__(
            "{} at byte {}: {}".format(path, offset, reason)
        )


class CheckpointError(BaseCA2NError):
    """
    Raised when a checkpoint cannot be written, is corrupted, truncated,
    of an unknown version or does not match the models it is loaded into.
    """

    category = "checkpoint"


class TrainingDiverged(BaseCA2NError):
    """
    Raised when a loss becomes non-finite.

    :param str reason: Description of the failure.
    :param epoch: Epoch index (stage 1) if known.
    :param step: Step index (stage 2) if known.
    :param component: Face component being trained, if any.
    :param term: The loss term that went non-finite, if any.
    """

    category = "diverged"

    def __init__(self, reason, epoch=None, step=None, component=None, term=None):
        self.reason = reason
        self.epoch = epoch
        self.step = step
        self.component = component
        self.term = term

        where = [
            "{}={}".format(key, value)
            for key, value in (
                ("epoch", epoch),
                ("step", step),
                ("component", component),
                ("term", term),
            )
            if value is not None
        ]
        message = reason if not where else "{} ({})".format(reason, ", ".join(where))
        super(TrainingDiverged, self).__init__(message)


class EnhancementError(BaseCA2NError):
    """
    Raised when the enhancement hook fails. The unenhanced image is kept
    on the exception so callers can still use it.

    :param str reason: What went wrong.
    :param str diagnostics: Output captured from the failing command.
    :param image: The original (unenhanced) image.
    """

    category = "enhancement"

    def __init__(self, reason, diagnostics="", image=None):
        self.reason = reason
        self.diagnostics = diagnostics
        self.image = image
        message = reason
        lines = (diagnostics or "").strip().splitlines()
        if lines:
            message = "{}: {}".format(reason, lines[-1])
        super(EnhancementError, self).__init__(message)


class TrainingInterrupted(BaseCA2NError):
    """
    Raised after training stopped on a signal. ``result`` holds whatever
    models were reached so they can still be checkpointed.
    """

    category = "interrupted"

    def __init__(self, reason, result=None):
        self.result = result
        super(TrainingInterrupted, self).__init__(reason)


def require(condition, attribute, reason, *args):
    """Raises a :class:`ValidationError` unless ``condition`` holds."""
    if not condition:
        raise ValidationError(attribute, reason.format(*args) if args else reason)
