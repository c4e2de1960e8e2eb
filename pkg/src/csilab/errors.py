"""Exception and warning types shared across the package."""


class CsilabError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CsilabError, ValueError):
    """A physical parameter is outside its allowed domain (s < 0, eta not in (0, 1], ...)."""


class DegenerateState(CsilabError, ValueError):
    """A normalized correlation is undefined because a mean photon number vanishes."""


class CutoffTooSmall(CsilabError):
    """The Fock-space truncation cannot hold the state at the requested accuracy."""


class ConfigError(CsilabError, ValueError):
    """A model, acquisition or analysis configuration is inconsistent."""


class SpecError(CsilabError, ValueError):
    """A filter specification is unrealizable on the given sample grid."""


class NoPeak(CsilabError):
    """Cross-correlation has no significant peak to locate a delay with."""


class DegenerateSet(CsilabError):
    """Too few trace sets carry a usable cross-correlation."""


class DcMissing(CsilabError, ValueError):
    """Normalization requested but the trace container has no DC means."""


class BandError(CsilabError, ValueError):
    """Requested analysis band extends beyond the data's frequency grid."""


class TraceFileError(CsilabError):
    """A trace container file is malformed (bad magic, checksum or truncation)."""


class ClipWarning(UserWarning):
    """More than a negligible fraction of samples hit the quantizer rails."""
