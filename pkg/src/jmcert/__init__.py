"""Joint-measurability certification for continuous-variable measurements.

Decides, constructively, when a Gaussian channel renders a set of
measurements jointly measurable, using s-ordered phase-space
quasiprobability distributions; every closed form is backed by an
independent truncated-Fock-space numerical oracle.
"""

from .channels import (
    ChannelClass,
    EbReport,
    GaussianChannel,
    channel_from_dict,
    compose,
    eb_sufficient,
    eb_tms_scan,
    from_class,
    loss_with_excess,
    make_channel,
    tms_after_channel,
    tms_covariance,
)
from .certifier import (
    MeasurementSet,
    MotherMeasurement,
    OrderingCertificate,
    Table1Row,
    breaking_test,
    certificate_to_dict,
    certify,
    default_table1_grid,
    mixed_compatibility,
    reproduce_table1,
    s_min_isotropic,
    table1_closed_form,
)
from .errors import (
    CompletePositivityError,
    ConvergenceError,
    JmcertError,
    OrderingRangeError,
    ValidationError,
)
from .linalg import PsdReport, hermitian_combine, min_eigenvalue, symplectic_form
from .measurements import (
    CLICK,
    NO_CLICK,
    GaussianMeasurement,
    Heterodyne,
    Homodyne,
    IdealPD,
    MeasurementModel,
    OrderingBound,
    RealisticPD,
    TensorProduct,
    ThermalPD,
    classicality,
    degree_of_incompatibility,
    loss_breaking_threshold,
    max_nonneg_ordering,
    model_from_dict,
    spqd,
)

__version__ = "0.1.0"
