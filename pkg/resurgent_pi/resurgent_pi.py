"""
The ResurgentPI module interacts with the library's submodules to compute the resurgence data of the ħ-deformed Painlevé I equation
ħ²q̈ = 6q² + t at chosen base points.
By default, each quantity is available, but the user can choose to exclude some.

This module contains two types of components:
First, the low-level processor, referenced in the documentation or in the code as a 'resurgence processor'.
At start-up : It loads or generates the exact coefficient table, unless every quantity needing it was excluded.
Afterwards, this processor uses the table in order to calculate the quantities the user wants.

The second type are parsed anchors, or collections of these anchors, obtained by calling the anchor or anchorCollection functions
from the processor. On top of the anchor itself (consistent t, τ, z values), these store the quantities after calculation,
along with a few statistics of the base point (Borel singular values, Stokes directions).
"""
import cmath
import logging
import math

from .utils import utils
from .series_engine import series_engine
from .stokes_geometry import stokes_geometry
from .borel_analysis import borel_analysis
from .resummation import resummation
from .parsed_anchor import parsed_anchor
from .parsed_collection import parsed_collection

LOGGER = logging.getLogger(__name__)


class ResurgentPI:
    """
    The ResurgentPI class provides a way to access the underlying library submodules for a given base point of the t-plane.

    - List of **attributes**::
        :param int max_n: Depth of the exact coefficient table.
        :param dict informations: Dictionary associating quantities with the functions needed to calculate them, alongside the dependencies needed.
        :param dict excluded_informations: Same as above, but contains quantities that have been excluded at start-up.
        :param dict dependencies: Dictionary associating dependency name with the loaded resource, here the coefficient table.
    """
    def __init__(self, exclude=[""], max_n=200, cache=None):
        """
        Constructor of the ResurgentPI class, won't return any value but creates the attributes :

        :param list(str) exclude: List of quantities to exclude, in order to modify the `informations` and `dependencies` attributes.
        :param int max_n: Depth of the exact coefficient table to load or generate.
        :param str cache: Optional path of the coefficient cache, overriding the default location.
        """
        self.max_n = max_n
        self.cache = cache

        # This dictionary associates quantities with the functions used to calculate them, alongside the dependencies needed.
        self.informations = dict(
            borel_singular_values=dict(function=self.borel_singular_values, dependencies=[], default_arguments=dict()),
            stokes_directions=dict(function=self.stokes_directions, dependencies=[], default_arguments=dict()),
            ramification=dict(function=self.ramification, dependencies=[], default_arguments=dict()),

            radius_estimate=dict(function=self.radius_estimate, dependencies=["coeff_table"], default_arguments=dict(order=120)),
            pade_singularities=dict(function=self.pade_singularities, dependencies=["coeff_table"], default_arguments=dict(degree=20)),
            optimal_truncation=dict(function=self.optimal_truncation, dependencies=["coeff_table"], default_arguments=dict(hbar=0.05j)),

            continuation=dict(function=self.continuation, dependencies=["coeff_table"],
                              default_arguments=dict(alpha=None, extent=0.5, n_steps=100)),
            exponential_type=dict(function=self.exponential_type, dependencies=["coeff_table"],
                                  default_arguments=dict(alpha=None, extent=3.0, n_steps=120)),
            variation=dict(function=self.variation, dependencies=["coeff_table"],
                           default_arguments=dict(alpha=None, detour=0.1, steps=240)),

            resummation=dict(function=self.resummation, dependencies=["coeff_table"],
                             default_arguments=dict(alpha=None, hbars=None, continuation="pade")),
            lateral_resummation=dict(function=self.lateral_resummation, dependencies=["coeff_table"],
                                     default_arguments=dict(alpha=None, hbars=None, side="L")),
            stokes_jump=dict(function=self.stokes_jump, dependencies=["coeff_table"],
                             default_arguments=dict(alpha=None, hbars=None)),
            ode_residual=dict(function=self.ode_residual, dependencies=["coeff_table"],
                              default_arguments=dict(alpha=None, hbar=None, width=1e-3)),
        )
        self.excluded_informations = dict()

        # Then remove things in self.informations based on what's in the exclude argument
        for value in list(self.informations.keys()):
            if value in exclude:
                self.excluded_informations[value] = self.informations[value]
                del self.informations[value]

        # Then iterate over what's remaining in self.informations to see what dependencies are needed:
        dependencies_to_add = set()
        for information in self.informations.values():
            for dependency in information["dependencies"]:
                dependencies_to_add.add(dependency)

        self.dependencies = {}
        for dependency in dependencies_to_add:
            self.dependencies[dependency] = utils.load_dependency(dependency, self.max_n, self.cache)

    # Utility functions : anchor/load/checks
    def anchor(self, t=None, z=None, branch=0):
        """
        Returns a ParsedAnchor instance for the base point given either by t (with one of the four quartic branches) or by z directly.

        :raises TurningPointError: for t = 0 or z = 0.
        """
        if (t is None) == (z is None):
            raise ValueError("Give exactly one of t or z")
        if z is not None:
            point = series_engine.Anchor.from_z(z)
        else:
            point = stokes_geometry.anchor_from_t(t, branch)
        return parsed_anchor.ParsedAnchor(point, self)

    def anchorCollection(self, collection):
        """
        Creates a ParsedCollection instance grouping several base points.

        Two structures are recognized, albeit they'll be converted to the first format:
        A dictionary that associates labels with lists of base points. e.g : dict(scan=[1, 2, 4], sectors=[...]).
        A singular list of base points, given the label 'label0'.
        Base points can be z values, Anchor instances or ParsedAnchor instances.
        """
        if isinstance(collection, dict):
            copy_collection = dict()
            for label, points in collection.items():
                copy_collection[label] = [self._as_parsed(point) for point in points]
            return parsed_collection.ParsedCollection(copy_collection, self)
        elif isinstance(collection, list):
            return parsed_collection.ParsedCollection(dict(label0=[self._as_parsed(point) for point in collection]), self)
        else:
            raise TypeError("Format of received collection not recognized, please give dict(label:list(z)) or list(z)")

    def _as_parsed(self, point):
        if isinstance(point, parsed_anchor.ParsedAnchor):
            return point
        if isinstance(point, series_engine.Anchor):
            return parsed_anchor.ParsedAnchor(point, self)
        return self.anchor(z=point)

    def load(self, value):
        """Checks if a quantity has been excluded, enables it and loads its dependencies if needed."""
        if value in list(self.excluded_informations.keys()):
            self.informations[value] = self.excluded_informations[value]
            del self.excluded_informations[value]
            LOGGER.info("Quantity '%s' can now be calculated", value)
            for dependency in self.informations[value]["dependencies"]:
                if dependency not in list(self.dependencies.keys()):
                    self.dependencies[dependency] = utils.load_dependency(dependency, self.max_n, self.cache)
        elif value in list(self.informations.keys()):
            LOGGER.info("No need to call .load(%s), the quantity already exists in instance.informations", value)
        else:
            raise ValueError("Quantity '{}' was not recognized as part of instance.informations or instance.excluded_informations".format(value))

    def check_quantity_and_dependencies_available(self, quantity_name):
        """Indicates whether a quantity has been excluded, and if its dependencies are available."""
        if quantity_name not in list(self.informations.keys()):
            LOGGER.warning("Quantity %s was not found in instance.informations, check whether it was excluded", quantity_name)
            return False
        for dependency_name in self.informations[quantity_name]["dependencies"]:
            if dependency_name not in list(self.dependencies.keys()):
                LOGGER.error("Dependency %s was not found in instance.dependencies", dependency_name)
                return False
        return True

    @property
    def table(self):
        if "coeff_table" not in self.dependencies:
            raise RuntimeError("The coefficient table was not loaded, every quantity needing it was excluded")
        return self.dependencies["coeff_table"]

    # Geometry
    def borel_singular_values(self, anchor):
        """ξ_± = ±z⁵/30."""
        return anchor.singular_values

    def stokes_directions(self, anchor):
        """Stokes directions read off the anchor's branch."""
        return stokes_geometry.stokes_directions_at(anchor)

    def ramification(self, anchor):
        """Ten ramification points of the Borel surface over z."""
        return stokes_geometry.ramification_set(anchor.z)

    # Borel plane
    def radius_estimate(self, anchor, order=120):
        """Radius of convergence of ω̂ from its exact coefficients, to be compared with |z⁵/30|."""
        series, _ = series_engine.omega_hat(anchor, order, self.table)
        return series_engine.radius_estimate(series)

    def pade_singularities(self, anchor, degree=20):
        """Genuine poles of the [degree/degree] Padé approximant of ω̂, nearest first."""
        series, _ = series_engine.omega_hat(anchor, 2 * degree, self.table)
        return borel_analysis.nearest_singularities(borel_analysis.pade(series, degree, degree))

    def optimal_truncation(self, anchor, hbar=0.05j):
        """Superasymptotic partial sum of q̂."""
        return series_engine.optimal_truncation(anchor, hbar, self.table)

    def continuation(self, anchor, alpha=None, extent=0.5, n_steps=100):
        """
        March along the ray α out to extent·|ξ_0|, with step refinement.

        Without α, the direction halfway between the two Stokes directions is used.
        """
        alpha = self._regular_direction(anchor) if alpha is None else alpha
        length = extent * abs(anchor.w)
        return borel_analysis.march_continue(anchor, borel_analysis.XiPath.ray(alpha, length), length / n_steps, self.table)

    def exponential_type(self, anchor, alpha=None, extent=3.0, n_steps=120):
        """Fitted (C, K) of ω along the ray α."""
        alpha = self._regular_direction(anchor) if alpha is None else alpha
        length = extent * abs(anchor.w)
        result = borel_analysis.march_continue(anchor, borel_analysis.XiPath.ray(alpha, length), length / n_steps,
                                               self.table, richardson=False)
        return result.bound_report

    def variation(self, anchor, alpha=None, detour=0.1, steps=240):
        """Variation across the Stokes direction α (default: the direction of ξ_+)."""
        alpha = utils.wrap_angle(cmath.phase(anchor.w)) if alpha is None else alpha
        modulus = abs(anchor.w)
        return borel_analysis.variation(anchor, alpha, detour * modulus, modulus / steps, self.table)

    # Resummation
    def resummation(self, anchor, alpha=None, hbars=None, continuation="pade"):
        """Borel-Laplace sums of q̂, p̂ and f̂_± along a regular direction."""
        alpha = self._regular_direction(anchor) if alpha is None else alpha
        hbars = self._default_hbars(anchor, alpha) if hbars is None else hbars
        return resummation.resum_q(resummation.ResumRequest(anchor, alpha, hbars, continuation), self.table)

    def lateral_resummation(self, anchor, alpha=None, hbars=None, side="L"):
        """Lateral sum along the Stokes direction α (default: the direction of ξ_+)."""
        alpha = utils.wrap_angle(cmath.phase(anchor.w)) if alpha is None else alpha
        hbars = self._default_hbars(anchor, alpha) if hbars is None else hbars
        return resummation.lateral_resum(resummation.ResumRequest(anchor, alpha, hbars, "march", side), self.table)

    def stokes_jump(self, anchor, alpha=None, hbars=None):
        """Stokes jump across α by both routes, with the decay-rate fit."""
        alpha = utils.wrap_angle(cmath.phase(anchor.w)) if alpha is None else alpha
        if hbars is None:
            modulus = abs(anchor.w)
            hbars = [modulus / ratio * cmath.exp(1j * alpha) for ratio in (8, 12, 17, 25)]
        return resummation.stokes_jump(anchor, alpha, hbars, self.table)

    def ode_residual(self, anchor, alpha=None, hbar=None, width=1e-3):
        """Residuals of ħ²q̈ = 6q² + t and ħq̇ = p for the resummed solution."""
        alpha = self._regular_direction(anchor) if alpha is None else alpha
        hbar = self._default_hbars(anchor, alpha)[0] if hbar is None else hbar
        return resummation.verify_ode(anchor, alpha, hbar, width, self.table)

    def tritronquee_family(self, t_modulus, alpha, hbar):
        """The five deformed tritronquée solutions for the phase α, one row per sector."""
        return resummation.tritronquee_family(t_modulus, alpha, hbar, self.table)

    @staticmethod
    def _regular_direction(anchor):
        return utils.wrap_angle(cmath.phase(anchor.w) + math.pi / 2)

    @staticmethod
    def _default_hbars(anchor, alpha):
        return [0.05 * cmath.exp(1j * alpha)]
