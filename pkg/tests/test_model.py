import math

import pytest
from hypothesis import given, strategies as st

from backhaul_sop.model import (
    ChannelMeans,
    PrimaryParams,
    SecondaryParams,
    SystemParams,
    ValidationError,
    db_to_linear,
    linear_to_db,
    validate,
)
from backhaul_sop.scenarios import BASELINE_CHANNELS_DB, baseline_params

finite_db = st.floats(min_value=-100, max_value=100, allow_nan=False)


def make(phi=0.1, K=6, reliability=0.99, gamma_T=10.0, beta=0.5, r_th=0.5, **channels):
    ch = dict(lambda_tr=2.0, lambda_td=0.25, lambda_te=4.0, lambda_sr=0.5, lambda_sd=2.0, lambda_se=0.5)
    ch.update(channels)
    return SystemParams(PrimaryParams(gamma_T, beta, phi), SecondaryParams(K, reliability, r_th), ChannelMeans(**ch))


@pytest.mark.parametrize("x_db, expected", [
    (0.0, 1.0),
    (3.0, 1.995262314968879601352),
    (-6.0, 0.2511886431509580111085),
])
def test_db_to_linear_values(x_db, expected):
    assert db_to_linear(x_db) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_db_to_linear_rejects_non_finite(bad):
    with pytest.raises(ValidationError):
        db_to_linear(bad)


@given(finite_db, finite_db)
def test_db_to_linear_is_multiplicative(a, b):
    assert db_to_linear(a) * db_to_linear(b) == pytest.approx(db_to_linear(a + b), rel=1e-12)


@given(finite_db, st.floats(min_value=1e-6, max_value=50))
def test_db_to_linear_strictly_increasing(a, delta):
    assert db_to_linear(a + delta) > db_to_linear(a)


@given(finite_db)
def test_db_round_trip(x_db):
    assert linear_to_db(db_to_linear(x_db)) == pytest.approx(x_db, rel=1e-12, abs=1e-12)


def test_channel_means_from_db():
    ch = ChannelMeans.from_db(**BASELINE_CHANNELS_DB)
    assert ch.lambda_tr == pytest.approx(1.99526231496888)
    assert ch.lambda_sr == pytest.approx(0.501187233627272)
    for key, value in ch.to_db().items():
        assert value == pytest.approx(BASELINE_CHANNELS_DB[key], abs=1e-12)


def test_baseline_accepted():
    params = baseline_params()
    assert params.secondary.K == 6
    assert params.secondary.reliability == 0.99
    assert params.primary.phi == 0.1
    assert params.primary.gamma_0 == pytest.approx(math.sqrt(2) - 1, rel=1e-15)


@pytest.mark.parametrize("kwargs, path, fragment", [
    ({"phi": 1.0}, "primary.phi", "phi must be strictly less than 1"),
    ({"phi": 0.0}, "primary.phi", "strictly greater than 0"),
    ({"K": 0}, "secondary.K", "at least 1"),
    ({"K": 65}, "secondary.K", "must not exceed 64"),
    ({"K": 2.0}, "secondary.K", "integer"),
    ({"reliability": 1.5}, "secondary.reliability", "[0, 1]"),
    ({"r_th": 0.0}, "secondary.r_th", "positive"),
    ({"gamma_T": -1.0}, "primary.gamma_T", "positive"),
    ({"beta": 0.0}, "primary.beta", "positive"),
    ({"lambda_se": 0.0}, "channels.lambda_se", "positive"),
])
def test_validate_rejects(kwargs, path, fragment):
    with pytest.raises(ValidationError) as info:
        validate(make(**kwargs))
    assert [p for p, _ in info.value.errors] == [path]
    assert fragment in info.value.errors[0][1]


def test_validate_accumulates_errors():
    with pytest.raises(ValidationError) as info:
        validate(make(phi=1.2, K=0, reliability=-0.1, lambda_td=-1.0))
    paths = [p for p, _ in info.value.errors]
    assert paths == ["primary.phi", "secondary.K", "secondary.reliability", "channels.lambda_td"]


@pytest.mark.parametrize("reliability", [0.0, 1.0])
def test_degenerate_reliability_accepted(reliability):
    assert validate(make(reliability=reliability)).secondary.reliability == reliability


def test_validate_idempotent():
    params = make()
    assert validate(validate(params)) == validate(params) == params
