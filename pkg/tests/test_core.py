import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniform_augment import core
from uniform_augment.core import (
    AugmentationSpace,
    SampledOp,
    TransformId,
    TransformSpec,
    apply_chain,
    map_magnitude,
    preset,
    sample_ops,
    validate_space,
)
from uniform_augment.errors import ConfigError, ContractError, InputError
from uniform_augment.rng import derive_stream, stream_from_seed

# Ranges transcribed independently of the package table, row by row.
TABLE = {
    "ShearX": ((-0.15, 0.15), (-0.3, 0.3), (-0.9, 0.9)),
    "ShearY": ((-0.15, 0.15), (-0.3, 0.3), (-0.9, 0.9)),
    "TranslateX": ((-0.225, 0.225), (-0.45, 0.45), (-1, 1)),
    "TranslateY": ((-0.225, 0.225), (-0.45, 0.45), (-1, 1)),
    "Rotate": ((-15, 15), (-30, 30), (-90, 90)),
    "AutoContrast": None,
    "Invert": None,
    "Equalize": None,
    "Solarize": ((0, 256), (0, 256), (0, 256)),
    "Posterize": ((6, 8), (4, 8), (2, 8)),
    "Contrast": ((0.5, 1.5), (0.1, 1.9), (0.01, 2)),
    "Color": ((0.5, 1.5), (0.1, 1.9), (0.01, 2)),
    "Brightness": ((0.5, 1.5), (0.1, 1.9), (0.01, 2)),
    "Sharpness": ((0.5, 1.5), (0.1, 1.9), (0.01, 2)),
    "Cutout": ((0, 0.1), (0, 0.2), (0, 0.6)),
}


@pytest.mark.parametrize("column, name", list(enumerate(["narrow", "default", "wide"])))
def test_presets_match_table(column, name):
    space = preset(name)
    assert space.num_ops == 2
    assert [t.name for t in space.transforms] == list(TABLE)
    for t in space.transforms:
        row = TABLE[t.name]
        if row is None:
            assert t.binary
        else:
            assert not t.binary
            assert (t.lo, t.hi) == row[column]


def test_preset_examples():
    assert (preset("default").spec(TransformId.ROTATE).lo, preset("default").spec(TransformId.ROTATE).hi) == (-30, 30)
    cut = preset("narrow").spec(TransformId.CUTOUT)
    assert (cut.lo, cut.hi) == (0, 0.1)
    post = preset("wide").spec(TransformId.POSTERIZE)
    assert (post.lo, post.hi) == (2, 8)
    for name in core.PRESET_NAMES:
        sol = preset(name).spec(TransformId.SOLARIZE)
        assert (sol.lo, sol.hi) == (0, 256)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("medium")


# map_magnitude -------------------------------------------------------------

ROTATE = preset("default").spec(TransformId.ROTATE)
POSTERIZE = preset("default").spec(TransformId.POSTERIZE)


@pytest.mark.parametrize("lam, expected", [(0.0, -30), (1.0, 30), (0.5, 0)])
def test_map_rotate(lam, expected):
    assert map_magnitude(lam, ROTATE) == expected


def test_map_posterize_midpoint():
    assert map_magnitude(0.5, POSTERIZE) == 6


def test_map_integer_rounding_ties_away():
    spec = TransformSpec(TransformId.SOLARIZE, 0, 3)
    assert map_magnitude(0.5, spec) == 2  # 1.5 -> 2
    assert map_magnitude(1 / 6, spec) == 1  # 0.5 -> 1


def test_map_binary_raises():
    with pytest.raises(ContractError):
        map_magnitude(0.3, preset("default").spec(TransformId.INVERT))


@pytest.mark.parametrize("name", core.PRESET_NAMES)
def test_map_endpoints_exact_and_monotone(name):
    lams = np.linspace(0, 1, 401)
    for spec in preset(name).transforms:
        if spec.binary:
            continue
        assert map_magnitude(0.0, spec) == spec.lo
        assert map_magnitude(1.0, spec) == spec.hi
        mapped = [map_magnitude(float(l), spec) for l in lams]
        assert all(a <= b for a, b in zip(mapped, mapped[1:]))


@given(lo=st.floats(-100, 100), width=st.floats(0, 100), a=st.floats(0, 1), b=st.floats(0, 1))
def test_map_monotone_property(lo, width, a, b):
    spec = TransformSpec(TransformId.ROTATE, lo, lo + width)
    a, b = sorted((a, b))
    assert map_magnitude(a, spec) <= map_magnitude(b, spec)


# sampling ------------------------------------------------------------------


def test_sample_zero_ops():
    assert sample_ops(preset("default").with_num_ops(0), stream_from_seed(1)) == []


def test_sample_reproducible():
    space = preset("default")
    a = sample_ops(space, stream_from_seed(42))
    b = sample_ops(space, stream_from_seed(42))
    assert a == b and len(a) == 2


def test_sample_draw_order_is_index_p_lambda():
    space = preset("default").with_num_ops(3)
    ops = sample_ops(space, stream_from_seed(5))
    ref = stream_from_seed(5)
    for op in ops:
        assert op.transform_index == ref.integer(15)
        assert op.p == ref.uniform()
        assert op.lam == ref.uniform()


_all_ids = list(TransformId)


@st.composite
def spaces(draw):
    ids = draw(st.lists(st.sampled_from(_all_ids), min_size=1, max_size=15, unique=True))
    specs = [
        TransformSpec(t, binary=True) if t in core.BINARY_TRANSFORMS else TransformSpec(t, 0.0, 1.0)
        for t in ids
    ]
    return AugmentationSpace(tuple(specs), draw(st.integers(0, 8)))


@given(space=spaces(), seed=st.integers(0, 2**64 - 1))
@settings(max_examples=200)
def test_sample_domains(space, seed):
    ops = sample_ops(space, stream_from_seed(seed))
    assert len(ops) == space.num_ops
    for op in ops:
        assert 0 <= op.transform_index < len(space.transforms)
        assert 0 <= op.p < 1 and 0 <= op.lam < 1


def test_selection_counts_concentrate():
    space = preset("default").with_num_ops(150_000)
    ops = sample_ops(space, stream_from_seed(2024))
    counts = np.bincount([o.transform_index for o in ops], minlength=15)
    assert counts.sum() == 150_000
    assert counts.min() >= 9700 and counts.max() <= 10300


# apply_chain ---------------------------------------------------------------


def _img(seed=0, shape=(12, 10, 3)):
    return np.random.default_rng(seed).integers(0, 256, shape, dtype=np.uint8)


def test_empty_chain_is_identity():
    img = _img()
    out, rec = apply_chain(img, [], preset("default"), stream_from_seed(0))
    np.testing.assert_array_equal(out, img)
    assert rec.ops == () and out is not img


def test_skip_branch_records_not_applied():
    img = _img()
    space = preset("default")
    # p = 0 can never pass the u < p gate
    ops = [SampledOp(4, 0.0, 0.9)]
    out, rec = apply_chain(img, ops, space, stream_from_seed(3))
    np.testing.assert_array_equal(out, img)
    assert not rec.ops[0].applied and rec.ops[0].param is None


def test_gate_follows_fresh_uniform():
    img = _img()
    space = preset("default")
    ops = [SampledOp(4, 0.5, 1.0), SampledOp(6, 0.5, 0.0)]
    gate = stream_from_seed(9)
    u1, u2 = gate.uniform(), gate.uniform()
    out, rec = apply_chain(img, ops, space, stream_from_seed(9))
    assert [o.applied for o in rec.ops] == [u1 < 0.5, u2 < 0.5]


def test_applied_record_param_rule():
    space = preset("default")
    ops = [SampledOp(4, 0.999999, 1.0), SampledOp(6, 0.999999, 0.2)]  # Rotate, Invert
    out, rec = apply_chain(_img(), ops, space, stream_from_seed(1))
    assert rec.ops[0].applied and rec.ops[0].param == 30
    assert rec.ops[1].applied and rec.ops[1].param is None
    assert rec.seed_trace == "seed=1"


def test_apply_chain_zero_area():
    with pytest.raises(InputError):
        apply_chain(np.zeros((0, 3, 3), np.uint8), [], preset("default"), stream_from_seed(0))


def test_gate_rate_half():
    space = preset("default").with_num_ops(1)
    img = _img(shape=(2, 2, 3))
    applied = 0
    n = 20_000
    for i in range(n):
        rng = derive_stream(11, 0, i)
        _, rec = apply_chain(img, sample_ops(space, rng), space, rng)
        applied += rec.num_applied
    sigma = math.sqrt(0.25 / n)
    assert abs(applied / n - 0.5) < 4 * sigma


def test_applied_count_mean_is_half_k():
    k = 4
    space = preset("default").with_num_ops(k)
    img = _img(shape=(3, 3, 3))
    n = 3000
    counts = []
    for i in range(n):
        rng = derive_stream(5, 1, i)
        _, rec = apply_chain(img, sample_ops(space, rng), space, rng)
        assert 0 <= rec.num_applied <= k
        counts.append(rec.num_applied)
    sigma = math.sqrt(k * 0.25 / n)
    assert abs(np.mean(counts) - k / 2) < 3 * sigma


def test_chain_determinism():
    space = preset("wide").with_num_ops(5)
    img = _img(4, (20, 17, 3))
    r1 = derive_stream(3, 0, 8)
    r2 = derive_stream(3, 0, 8)
    a, ra = apply_chain(img, sample_ops(space, r1), space, r1)
    b, rb = apply_chain(img, sample_ops(space, r2), space, r2)
    np.testing.assert_array_equal(a, b)
    assert ra == rb


# validation and config ------------------------------------------------------


def test_validate_default_ok():
    for name in core.PRESET_NAMES:
        assert validate_space(preset(name)) == []


def test_validate_reports_all_violations():
    specs = list(preset("default").transforms)
    specs[4] = TransformSpec(TransformId.ROTATE, 30, -30)
    specs.append(TransformSpec(TransformId.INVERT, binary=True))
    problems = validate_space(AugmentationSpace(tuple(specs), -1))
    text = "\n".join(problems)
    assert "lo > hi" in text
    assert "duplicate transform id" in text
    assert "num_ops < 0" in text
    assert len(problems) == 3


def test_validate_binary_flag_and_domain():
    space = AugmentationSpace(
        (
            TransformSpec(TransformId.INVERT, binary=False),
            TransformSpec(TransformId.POSTERIZE, 0, 8),
            TransformSpec(TransformId.ROTATE, math.nan, 3),
        )
    )
    problems = validate_space(space)
    assert len(problems) == 3
    assert "binary flag" in problems[0]
    assert "native domain" in problems[1]
    assert "non-finite" in problems[2]


def test_config_round_trip(tmp_path):
    space = preset("wide").with_num_ops(3)
    path = tmp_path / "space.json"
    path.write_text(json.dumps(core.space_to_dict(space)))
    assert core.load_space(path) == space


@pytest.mark.parametrize(
    "payload",
    [
        "not json",
        json.dumps([]),
        json.dumps({"num_ops": 2}),
        json.dumps({"num_ops": 2, "transforms": [{"name": "Blur", "low": 0, "high": 1, "binary": False}]}),
        json.dumps({"num_ops": "2", "transforms": []}),
        json.dumps({"num_ops": 2, "transforms": [], "extra": 1}),
        json.dumps({"num_ops": 2, "transforms": [{"name": "Rotate", "low": 30, "high": -30, "binary": False}]}),
    ],
)
def test_config_errors(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    with pytest.raises(ConfigError):
        core.load_space(path)


def test_describe_ops_maps_params():
    space = preset("default")
    rows = core.describe_ops([SampledOp(9, 0.1, 0.5), SampledOp(5, 0.2, 0.3)], space)
    assert rows[0] == {"transform": "Posterize", "index": 9, "p": 0.1, "lambda": 0.5, "param": 6.0}
    assert rows[1]["param"] is None
