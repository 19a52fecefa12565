"""
The utils module contains common functions that are used by the other classes:
the exceptions raised across the library, the location of the coefficient cache,
the loader used by the processor for its dependencies, and small parsing and
file-writing helpers shared by the command-line front end.
"""
import logging
import os
import tempfile

import numpy as np

LOGGER = logging.getLogger(__name__)

DATA_ENTRY_POINT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'data'))
CACHE_ENV_VAR = "RESURGENT_PI_CACHE"
DEFAULT_CACHE_NAME = "coeffs.txt"


class ResurgenceError(Exception):
    """Base class of every error raised on purpose by the library."""


class TurningPointError(ResurgenceError, ValueError):
    """Raised when an anchor sits on the turning point t = 0 (equivalently z = 0)."""


class CoeffTableError(ResurgenceError):
    """Raised when a coefficient table is too shallow for the requested order."""


class CacheFormatError(CoeffTableError):
    """
    Raised when a cache file cannot be parsed.

    :param int line_number: 1-based number of the offending line, None for whole-file problems.
    """
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = "line {}: {}".format(line_number, message)
        super().__init__(message)
        self.line_number = line_number


class AnchorMismatchError(ResurgenceError, ValueError):
    """Raised when two series built at different anchors are combined."""


class PadeDegeneracyError(ResurgenceError):
    """Raised when the Padé linear system is rank deficient; a lower order usually helps."""


class ContinuationError(ResurgenceError):
    """Raised when the characteristic march cannot continue along the requested path."""


class ClearanceError(ContinuationError):
    """Raised when a path hits the turning point image w = 0."""


class CorrectorDivergenceError(ContinuationError):
    """Raised when the implicit diagonal term does not settle."""


class StepRefinementError(ContinuationError):
    """Raised when halving the step changes the result beyond the accepted tolerance."""


class LaplaceDivergenceError(ResurgenceError):
    """Raised when the integrand grows faster than the Laplace kernel decays."""


class StokesDirectionError(ResurgenceError, ValueError):
    """Raised when a direction is (or is not) a Stokes direction against the caller's expectation."""


class SectorBoundaryError(ResurgenceError, ValueError):
    """Raised when a point lies on a Stokes line, so that no sector can be assigned."""


class OffSurfaceError(ResurgenceError, ValueError):
    """Raised when a point does not lie on the Borel surface quintic."""


def cache_path(path=None):
    """
    Location of the exact coefficient cache.

    An explicit path wins, then the RESURGENT_PI_CACHE environment variable, then the data/ folder of the package.
    """
    if path is not None:
        return os.path.abspath(path)
    from_env = os.environ.get(CACHE_ENV_VAR)
    if from_env:
        return os.path.abspath(from_env)
    return os.path.join(DATA_ENTRY_POINT, DEFAULT_CACHE_NAME)


def load_dependency(dependency_name, max_n=200, path=None):
    """
    Used by the ResurgentPI processor: loads a resource from the disk cache, or computes it (storing it locally if possible).

    These are meant to be stored in the processor as follows :
    ResurgentPI.dependencies["coeff_table"] = utils.load_dependency("coeff_table", max_n)

    :param str dependency_name: Either "coeff_table" or "gauss_legendre".
    :param int max_n: Depth of the coefficient table, or number of Gauss-Legendre nodes.
    :param str path: Optional cache file overriding the default location.
    """
    if dependency_name == "coeff_table":
        from ..exact_coeffs import exact_coeffs
        location = cache_path(path)
        table = None
        if os.path.exists(location):
            LOGGER.info("Reading coefficient table from %s", location)
            table = exact_coeffs.load_table(location)
        if table is None or table.max_n < max_n:
            LOGGER.info("Generating exact coefficients up to n=%d", max_n)
            table = exact_coeffs.extend_table(table, max_n) if table is not None else exact_coeffs.build_table(max_n)
            try:
                exact_coeffs.save_table(table, location)
            except OSError as error:
                # Read-only installs still work, the table just isn't kept.
                LOGGER.warning("Could not write coefficient cache %s (%s)", location, error)
        return table

    elif dependency_name == "gauss_legendre":
        nodes, weights = np.polynomial.legendre.leggauss(max_n)
        return dict(nodes=nodes, weights=weights, low_order=np.polynomial.legendre.leggauss(max(2, max_n // 2)))

    else:
        raise ValueError("Dependency '{}' was not recognized as a valid dependency.".format(dependency_name))


def parse_complex(text):
    """
    Parses `a+bi` style literals (also `0.05i`, `-i`, `3`, `1e-3-2e-2j`) into a complex number.

    :raises ValueError: when the literal cannot be read.
    """
    cleaned = str(text).strip().replace(" ", "").replace("I", "i").replace("J", "j")
    if not cleaned:
        raise ValueError("empty complex literal")
    cleaned = cleaned.replace("i", "j")
    if cleaned.endswith("j"):
        body = cleaned[:-1]
        # bare 'j', '+j', '-j' and '...+j'
        if body == "" or body[-1] in "+-":
            cleaned = body + "1j"
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError("could not read '{}' as a complex number".format(text)) from None


def write_atomically(path, text):
    """Writes text to path through a temporary file in the same folder followed by a rename."""
    folder = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(folder, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def wrap_angle(angle):
    """Reduces an angle to [0, 2π)."""
    reduced = float(np.mod(angle, 2 * np.pi))
    if reduced >= 2 * np.pi:
        reduced -= 2 * np.pi
    return reduced


def angle_distance(first, second):
    """Distance between two angles on the circle, in [0, π]."""
    difference = abs(wrap_angle(first) - wrap_angle(second))
    return min(difference, 2 * np.pi - difference)
