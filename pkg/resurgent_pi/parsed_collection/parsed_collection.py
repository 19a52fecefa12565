"""
The ParsedCollection module is a convenient way to group ParsedAnchors together, e.g. the branches of a tritronquée family or an anchor-modulus scan.
"""
import logging

import numpy as np
import pandas as pd

LOGGER = logging.getLogger(__name__)


class ParsedCollection:
    """
    The ParsedCollection class serves as a convenient way to group ParsedAnchor instances together and access relevant ResurgentPI functions.

    It is meant to be created as a result of ResurgentPI.anchorCollection() since it depends on a processor in order to access functions,
    and also supposes that each anchor stored is actually an instance of ParsedAnchor.

    List of methods : __init__, call_quantity(), show_available_quantities(), show_quantities(), show_statistics()
    List of attributes : content, processor, statistics, quantities
    """
    def __init__(self, anchor_collection, processor):
        """
        Constructor of the ParsedCollection class, creates the 'content', 'quantities', 'statistics', and 'processor' attributes.

        :param dict(list(ParsedAnchor)) anchor_collection: Structure associating labels with their anchors.
        :param ResurgentPI processor: Processor holding the registry of quantities.
        """
        self.processor = processor
        self.content = anchor_collection

        self.quantities = dict()
        for info in list(processor.informations.keys()) + list(processor.excluded_informations.keys()):
            self.quantities[info] = dict()
            for label in list(self.content.keys()):
                self.quantities[info][label] = None

        self.statistics = dict()
        for label, anchors in self.content.items():
            moduli = [anchor.statistics["xi_modulus"] for anchor in anchors]
            self.statistics[label] = dict(
                totalAnchors=len(anchors),
                minXiModulus=min(moduli) if moduli else None,
                maxXiModulus=max(moduli) if moduli else None,
                meanXiModulus=float(np.mean(moduli)) if moduli else None,
            )

    def show_statistics(self):
        """Returns the statistics of each label as a dataframe indexed by label."""
        return pd.DataFrame.from_dict(self.statistics, orient="index")

    def call_quantity(self, quantity_name, arguments=None, force=False):
        """
        Computes a quantity for every anchor of every label, through the ParsedAnchor cache.

        :return: dict associating each label with the list of per-anchor values.
        """
        values = dict()
        for label in list(self.content.keys()):
            if self.quantities[quantity_name][label] is not None and not force and arguments is None:
                values[label] = self.quantities[quantity_name][label]
            elif self.processor.check_quantity_and_dependencies_available(quantity_name):
                LOGGER.info("computing %s for %d anchors of label %s", quantity_name, len(self.content[label]), label)
                self.quantities[quantity_name][label] = [anchor.call_quantity(quantity_name, arguments, force)
                                                         for anchor in self.content[label]]
                values[label] = self.quantities[quantity_name][label]
            else:
                values[label] = None
        return values

    def show_available_quantities(self):
        return list(self.quantities.keys())

    def show_quantities(self, quantity_name, arguments=None, force=False):
        """Returns a dataframe with one row per anchor: label, t, z, |ξ_0| and the quantity."""
        values = self.call_quantity(quantity_name, arguments, force)
        rows = []
        for label, anchors in self.content.items():
            for anchor, value in zip(anchors, values[label] or [None] * len(anchors)):
                rows.append(dict(label=label, t=anchor.content.t, z=anchor.content.z,
                                 xi_modulus=anchor.statistics["xi_modulus"], **{quantity_name: value}))
        return pd.DataFrame(rows)
