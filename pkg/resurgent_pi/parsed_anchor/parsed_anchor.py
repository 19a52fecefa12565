"""
The ParsedAnchor module contains the ParsedAnchor class, serving as an interface between a base point and a resurgence processor instance.

It is used to store the quantities computed at one anchor (t, τ, z) so they are only calculated once, along with a few statistics
of the base point that several quantities share.
This class is meant to be created as a result of ResurgentPI.anchor() since it uses the processor in order to know which quantities
are available, and have access to the coefficient table necessary to calculate them.
"""
import cmath
import logging

import pandas as pd

from ..stokes_geometry import stokes_geometry

LOGGER = logging.getLogger(__name__)


class ParsedAnchor:
    """
    The ParsedAnchor class serves as an interface between a base point and a ResurgentPI instance in order to store and output quantities.

    List of methods : __init__, show_anchor(), call_quantity(), show_available_quantities(), show_quantities(), show_statistics().
    It also contains accessor functions based on ResurgentPI methods, sharing the same name, these use the helper function call_quantity() in order to work.
    List of attributes : content, processor, statistics, quantities
    """
    def __init__(self, anchor, processor):
        """
        Constructor of the ParsedAnchor class, creates the 'content', 'quantities', 'statistics', and 'processor' attributes.

        Keep in mind that the quantities default to None since they haven't been calculated yet.

        :param Anchor anchor: Base point.
        :param ResurgentPI processor: Processor holding the registry of quantities and the coefficient table.
        """
        self.processor = processor
        self.content = anchor

        self.quantities = dict()
        for info in list(processor.informations.keys()):
            self.quantities[info] = None
        for info in list(processor.excluded_informations.keys()):
            self.quantities[info] = None

        directions = stokes_geometry.stokes_directions_at(anchor)
        self.statistics = dict(
            t=anchor.t,
            tau=anchor.tau,
            z=anchor.z,
            branch=anchor.branch_id,
            xi_plus=anchor.w,
            xi_modulus=abs(anchor.w),
            alpha_plus=directions.alpha_plus,
            alpha_minus=directions.alpha_minus,
            arg_z=cmath.phase(anchor.z),
        )

    def show_anchor(self):
        return self.content.as_dict()

    def show_statistics(self):
        """Returns the statistics of the base point as a one-row dataframe."""
        return pd.DataFrame([self.statistics])

    def call_quantity(self, quantity_name, arguments=None, force=False):
        """
        Helper function that gets a quantity if it already exists, otherwise checks if it's available, if so calls the relevant function
        from the ResurgentPI processor.

        Use of function is: instance.call_quantity(quantity_name:str, arguments:list(argi), force:bool)
        If the underlying function needs no additional arguments, just pass an empty list, e.g : instance.call_quantity("ramification", [], True)

        :param str quantity_name: Name of a quantity recognized by ResurgentPI.informations.
        :param list(any) arguments: Values used to change behavior of underlying functions, in the order of their default_arguments.
        :param bool force: Indicates whether to force the calculation of a quantity or not.
        """
        if quantity_name not in self.quantities:
            raise ValueError("Quantity '{}' is unknown to the processor".format(quantity_name))
        if self.quantities[quantity_name] is not None and not force and arguments is None:
            return self.quantities[quantity_name]
        elif self.processor.check_quantity_and_dependencies_available(quantity_name):
            func = self.processor.informations[quantity_name]["function"]
            if arguments is None:
                arguments = self.processor.informations[quantity_name]["default_arguments"].values()
            LOGGER.debug("computing %s at z = %s", quantity_name, self.content.z)
            self.quantities[quantity_name] = func(self.content, *(arguments))
            return self.quantities[quantity_name]
        else:
            return None

    def show_quantities(self, force=False):
        """
        Returns a dataframe containing each calculated quantity, can force calculation with default values.

        :param bool force: Indicates whether to force the calculation of each quantity
        """
        if force:
            for quantity_name in list(self.quantities.keys()):
                self.call_quantity(quantity_name, force=True)
        return pd.DataFrame([self.quantities])

    def show_available_quantities(self):
        return list(self.quantities.keys())

    # Accessors
    def borel_singular_values(self, force=False):
        return self.call_quantity("borel_singular_values", force=force)

    def stokes_directions(self, force=False):
        return self.call_quantity("stokes_directions", force=force)

    def ramification(self, force=False):
        return self.call_quantity("ramification", force=force)

    def radius_estimate(self, order=120, force=False):
        return self.call_quantity("radius_estimate", [order], force)

    def pade_singularities(self, degree=20, force=False):
        return self.call_quantity("pade_singularities", [degree], force)

    def optimal_truncation(self, hbar=0.05j, force=False):
        return self.call_quantity("optimal_truncation", [hbar], force)

    def continuation(self, alpha=None, extent=0.5, n_steps=100, force=False):
        return self.call_quantity("continuation", [alpha, extent, n_steps], force)

    def exponential_type(self, alpha=None, extent=3.0, n_steps=120, force=False):
        return self.call_quantity("exponential_type", [alpha, extent, n_steps], force)

    def variation(self, alpha=None, detour=0.1, steps=240, force=False):
        return self.call_quantity("variation", [alpha, detour, steps], force)

    def resummation(self, alpha=None, hbars=None, continuation="pade", force=False):
        return self.call_quantity("resummation", [alpha, hbars, continuation], force)

    def lateral_resummation(self, alpha=None, hbars=None, side="L", force=False):
        return self.call_quantity("lateral_resummation", [alpha, hbars, side], force)

    def stokes_jump(self, alpha=None, hbars=None, force=False):
        return self.call_quantity("stokes_jump", [alpha, hbars], force)

    def ode_residual(self, alpha=None, hbar=None, width=1e-3, force=False):
        return self.call_quantity("ode_residual", [alpha, hbar, width], force)
