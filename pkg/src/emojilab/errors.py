"""Toolkit exception hierarchy."""


class EmojilabError(Exception):
    """Base class for toolkit errors."""


class InputError(EmojilabError):
    """Malformed or insufficient input data (CLI exit code 2)."""


class NumericalError(EmojilabError):
    """A computation could not be carried out (CLI exit code 3)."""
