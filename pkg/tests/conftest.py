import pytest

from aztec_rect import DomainSpec, SamplerConfig, sample_batch
from aztec_rect.combinatorics import omega_from_segments
from aztec_rect.limitshape import SegmentMeasure

AZTEC_MEASURE = SegmentMeasure.from_segments([(0.0, 1.0)])
TWOSEG = ((0.0, 0.5), (1.5, 2.0))
TWOSEG_MEASURE = SegmentMeasure.from_segments(TWOSEG)


@pytest.fixture(scope="session")
def aztec100_samples():
    """800 float-path samples of the N=100 Aztec diamond (criteria 7, 8, 10)."""
    cfg = SamplerConfig(
        domain=DomainSpec.aztec(100),
        master_seed=20240811,
        num_samples=800,
        arithmetic_mode="float",
    )
    return sample_batch(cfg)


@pytest.fixture(scope="session")
def twoseg100_samples():
    """100 float-path samples of the two-segment domain at N=100 (criterion 8)."""
    domain = DomainSpec(100, omega_from_segments(TWOSEG, 100))
    cfg = SamplerConfig(
        domain=domain,
        master_seed=777,
        num_samples=100,
        arithmetic_mode="float",
    )
    return sample_batch(cfg)


@pytest.fixture(scope="session")
def aztec80_samples():
    """2000 float-path samples of the N=80 Aztec diamond (criterion 9)."""
    cfg = SamplerConfig(
        domain=DomainSpec.aztec(80),
        master_seed=31337,
        num_samples=2000,
        arithmetic_mode="float",
    )
    return sample_batch(cfg)
