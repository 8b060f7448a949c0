"""Exception types raised across the package."""


class AugmentError(Exception):
    """Base class for all errors raised by uniform_augment."""


class ConfigError(AugmentError, ValueError):
    """Bad preset name, malformed config file, or invalid augmentation space."""


class ContractError(AugmentError, ValueError):
    """An operation was called with arguments outside its documented domain."""


class InputError(AugmentError, ValueError):
    """Unusable input data: zero-area image, empty dataset, missing directory."""


class DecodeError(InputError):
    """An image file could not be decoded."""

    def __init__(self, source, reason):
        self.source = str(source)
        self.reason = str(reason)
        super().__init__(f"cannot decode {self.source}: {self.reason}")
