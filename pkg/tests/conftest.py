import pytest

from fsorf import FsoParams, RfParams


@pytest.fixture
def table1_fso() -> FsoParams:
    """Tabulated FSO subsystem, moderate fog (42.2 dB/km), 1 km link."""
    return FsoParams(
        wavelength_m=1550e-9,
        lo_power_W=1e-2,
        shot_noise_var=5e-12,
        responsivity_A_per_W=0.5,
        detector_diameter_m=0.2,
        tx_power_W=10 ** (15 / 10) * 1e-3,   # 15 dBm
        divergence_rad=2.5e-3,
        jitter_std_m=0.3,
        link_distance_m=1000.0,
        cn2=5e-14,
        weather_atten_dB_per_km=42.2,
    )


@pytest.fixture
def table1_rf() -> RfParams:
    """Tabulated 60 GHz RF subsystem, no rain, 1 km link."""
    return RfParams(
        carrier_hz=60e9,
        bandwidth_hz=250e6,
        tx_power_W=10 ** (25 / 10) * 1e-3,   # 25 dBm
        tx_gain_dBi=43.0,
        rx_gain_dBi=43.0,
        noise_psd_dBm_per_MHz=-114.0,
        noise_figure_dB=5.0,
        oxygen_atten_dB_per_km=15.1,
        rain_atten_dB_per_km=0.0,
        nakagami_m=5.0,
        link_distance_m=1000.0,
    )
