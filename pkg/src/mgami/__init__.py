"""Average mutual information of finite constellations over mixture-gamma
fading, its high-SNR asymptotics, and power allocation across parallel
fading channels."""

from .ami import (
    AsymptoticCharacterization,
    ami_gap,
    ami_mc,
    ami_quadrature,
    asymptotic_ami,
    asymptotic_gap,
    average_mi,
    characterize_asymptote,
    corollary_asymptote,
)
from .awgn_info import MellinValue, mellin_mmse, mmse, mmse_is_derivative_check, mutual_information
from .constellation import Constellation, make_custom, make_psk, make_qam
from .errors import NumericalError, SolverError, TruncationError
from .mg_fading import KG, EtaMu, KappaMu, MixtureGamma, Nakagami, Rician, cdf, from_params, pdf, sample
from .power_alloc import (
    ParallelChannels,
    PowerPolicy,
    Subchannel,
    asymptotic_allocate,
    exact_allocate,
    limiting_allocate,
    marginal_rate,
)
from .quadrature import QuadratureRule, gauss_hermite, gauss_laguerre

__version__ = "0.1.0"
