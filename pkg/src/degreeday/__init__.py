"""Local sensitivities of CDD/HDD temperature futures and options under CAR(p) dynamics."""

from .car_model import (
    CarModel,
    ModelError,
    PiecewiseConstant,
    StationarityError,
    conditional_cov,
    conditional_mean,
    f_kernel,
    f_vector,
    m_theta,
    mat_exp,
    sigma_sq,
    simulate_state,
)
from .kernels import NUMBA_ENABLED
from .options import (
    OptionSpec,
    call_approx,
    call_approx_greeks,
    call_exact_mc,
    call_greek_density_mc,
    conditional_law,
)
from .pricing import (
    ApproxCoefficients,
    ContractSpec,
    Day,
    Period,
    Scheme,
    Side,
    approx_coeffs_day,
    approx_coeffs_period,
    fcdd_approx,
    fcdd_day,
    fcdd_period,
    fhdd_day,
    fhdd_period,
    futures_price,
    psi,
)
from .seasonal import SeasonalFunction, ingest_csv, reference_profile, state_from_temps
from .sensitivity import (
    SensitivityVector,
    dapprox,
    dfcdd_day,
    dfcdd_period,
    fd_gradient,
    relative_error_report,
)

__version__ = "0.1.0"
