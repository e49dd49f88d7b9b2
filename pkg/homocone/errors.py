# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.


class HomoconeError(ValueError):
    """Base class of all errors raised by homocone.

    Keyword arguments are kept as attributes so that callers (and the cli)
    can report the context of a failure, e.g. a residual or a witness.
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context
        for key, value in context.items():
            setattr(self, key, value)


class ConeSpecError(HomoconeError):
    pass


class ClosureViolation(HomoconeError):
    pass


class StructureLeak(HomoconeError):
    pass


class NotInCone(HomoconeError):
    pass


class NotInDualCone(HomoconeError):
    pass


class NotInGindikinSet(HomoconeError):
    pass


class NonRegularStratum(HomoconeError):
    pass


class EmptyBlock(HomoconeError):
    pass


class PreconditionViolation(HomoconeError):
    pass


class OutOfDomain(HomoconeError):
    pass


class DegenerateScale(HomoconeError):
    pass


class InconsistentCharacter(HomoconeError):
    pass


class NoBridge(HomoconeError):
    pass


class OutputExists(HomoconeError):
    pass
