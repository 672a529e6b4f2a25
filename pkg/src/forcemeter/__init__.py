"""Quantum-noise budgets for optomechanical force measurement.

Frequency-domain engine for linearized radiation-pressure force
sensing: closed-form sensitivity spectra for monochromatic
(variational-homodyne) and dichromatic (back-action-evading) probe
schemes, validated against a seeded time-domain stochastic oracle.
"""

__version__ = "0.1.0"

from .algebra import (
    FrequencyGrid,
    LinearForm,
    NoiseChannel,
    amplitude_quadrature,
    combine,
    commutator,
    cross_psd,
    phase_quadrature,
    psd,
    signal_transfer,
)
from .budget import (
    DetectionSpec,
    SpectrumResult,
    detection_threshold,
    evaded_noise_four_probe,
    evaded_noise_toy,
    force_referred_psd,
    optimize_strength,
    phase_readout_noise,
    resonant_sql_reference,
    snr,
    sql_force,
    strength_sweep,
    sub_sql_bandwidth,
    variational_noise,
)
from .errors import (
    ConfigError,
    ContractError,
    EngineError,
    NoCancellationError,
    SingularityError,
    StructureError,
    UnsupportedSchemeError,
)
from .mechanics import (
    Oscillator,
    Probe,
    ProbeMode,
    amplitude_for_strength,
    baseband_susceptibility,
    probe_from_strength,
    probe_strength,
    static_displacement,
    susceptibility,
    thermal_occupation,
)
from .oracle import (
    DetectionResult,
    HomodyneRecord,
    OracleConfig,
    PsdEstimate,
    analytic_record_psd,
    detection_mc,
    postprocess_subtraction,
    rebuild_on_grid,
    simulate,
    welch_psd,
)
from .schemes import (
    SchemeInstance,
    backaction_record,
    build_four_probe,
    build_monochromatic,
    build_toy_dichromatic,
    optimal_homodyne_angle,
    pointwise_optimal_angles,
    signal_record_name,
    toy_compensation_force,
    toy_reflected_amplitudes,
    toy_steady_amplitude,
)
