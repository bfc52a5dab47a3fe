from fractions import Fraction

import pytest

from app.errors import InputError, ParameterError, ResourceError
from app.models.extractor_spec import ExtractorKind, ExtractorSpec, GuvParams
from app.services.extractors import (
    GuvCondenser,
    GuvExtractor,
    HashExtractor,
    IdentitySeedExtractor,
    WalkExtractor,
    build_extractor,
    derive_guv_params,
    flat_source_tvd,
    guv_condense,
    guv_expander,
    guv_ext,
    hash_extract,
    random_flat_sources,
    random_function,
    sampler_badset_count,
    verify_extractor,
    walk_extract,
)
from app.utils.bits import all_bitstrings, bits_to_int, int_to_bits
from app.utils.expander import Expander
from app.utils.finite_field import FqElement, PolyOverFq, naive_frobenius_power, poly_eval


def test_hash_extractor_multiplies_in_gf256():
    extractor = HashExtractor(ell=8, d=8, s=4, k=8, eps=0.25)
    assert extractor(int_to_bits(0x57, 8), int_to_bits(0x83, 8)) == (1, 0, 0, 0)
    assert hash_extract(int_to_bits(0x57, 8), int_to_bits(0, 8), 4, 8, 0.25) == (0, 0, 0, 0)


@pytest.mark.parametrize(
    "ell, d, s, k, eps",
    [(8, 9, 4, 8, 0.25), (8, 8, 9, 8, 0.25), (8, 8, 5, 8, 0.25)],
)
def test_hash_extractor_rejects_infeasible_parameters(ell, d, s, k, eps):
    with pytest.raises(ParameterError):
        HashExtractor(ell, d, s, k, eps)


def test_extractor_checks_argument_lengths():
    extractor = HashExtractor(ell=8, d=4, s=2, k=8, eps=0.25)
    with pytest.raises(InputError):
        extractor((0,) * 7, (0,) * 4)
    with pytest.raises(InputError):
        extractor((0,) * 8, (0,) * 5)


def test_expander_neighbors():
    assert Expander(6).neighbor(0, 2) == 8
    assert Expander(6).neighbor(0, 7) == 8
    assert Expander(6).neighbor(0, 1) == 63
    assert Expander(3).neighbor(5, 4) == 1
    assert Expander(3).is_complete
    assert Expander(3).walk(5, [4, 1]) == [5, 1, 2]
    with pytest.raises(InputError):
        Expander(6).labels_from_bits((0, 1))


def test_walk_extractor():
    extractor = WalkExtractor(16, 2, 1, 4)
    assert extractor.spec.d == 6
    x = (0, 0, 1, 1, 0, 1, 1, 0) + (0,) * 8
    assert extractor(x, (1, 0, 0, 0, 1, 0)) == (1, 1, 1, 0)


def test_walk_extractor_parameters():
    with pytest.raises(ParameterError):
        WalkExtractor(4, 8, 1, 4)
    with pytest.raises(ParameterError):
        WalkExtractor(16, 2, 1, 5)


def test_guv_parameters():
    params = derive_guv_params(64, 8, 0.125)
    assert (params.a, params.b, params.h_log2, params.m) == (2, 0, 87, 1)
    assert params.log_q == 100
    assert params.n * params.log_q >= 64
    with pytest.raises(ParameterError):
        derive_guv_params(64, 8, 0.125, alpha=0.5)
    with pytest.raises(ParameterError):
        derive_guv_params(64, 65, 0.125)
    with pytest.raises(ParameterError):
        derive_guv_params(64, 8, 0.125, max_log_q=20)


def test_guv_extractor_shape():
    extractor = GuvExtractor(64, 8, 0.125)
    assert (extractor.spec.d, extractor.spec.s) == (115, 6)
    x = tuple((k * 7) % 3 % 2 for k in range(64))
    y = tuple(k % 2 for k in range(115))
    out = extractor(x, y)
    assert len(out) == 6
    assert out == extractor(x, y)

    spec = ExtractorSpec(ell=64, d=115, s=6, k=8, eps=0.125, kind=ExtractorKind.GUV_COMPOSED)
    assert build_extractor(spec)(x, y) == out
    with pytest.raises(ParameterError):
        build_extractor(spec.model_copy(update={"d": 114}))
    with pytest.raises(ParameterError):
        build_extractor(spec.model_copy(update={"kind": ExtractorKind.CUSTOM}))


def test_condenser_coordinates_follow_powers_of_h():
    # h = 2^2 over F16 with n = 3 coefficients
    params = GuvParams(a=0, b=1, h_log2=2, m=3)
    f = PolyOverFq.from_bits((1, 0, 1, 1, 0, 1, 1, 0, 0, 0, 1, 1), 0, 1)
    y = FqElement(0, (0b0110,))
    coordinates = guv_expander(f, y, params)
    assert coordinates[0] == y
    assert coordinates[1] == poly_eval(f, y)
    assert coordinates[2] == poly_eval(naive_frobenius_power(f, 2), y)
    assert coordinates[3] == poly_eval(naive_frobenius_power(f, 4), y)

    condenser = GuvCondenser(params)
    assert (condenser.seed_bits, condenser.output_bits) == (4, 16)
    assert len(condenser((0,) * 12, (0, 1, 1, 0))) == 16
    with pytest.raises(ParameterError):
        guv_expander(f, FqElement.one(1), params)


def test_identity_seed_extractor_is_uniform():
    extractor = IdentitySeedExtractor(4, 2)
    assert flat_source_tvd(extractor, [(0, 0, 0, 0)]) == 0


def test_flat_source_tvd_of_a_constant_map():
    extractor = HashExtractor(ell=4, d=1, s=1, k=4, eps=0.5)
    # y * 0 = 0 for both seeds
    assert flat_source_tvd(extractor, [(0, 0, 0, 0)]) == Fraction(1, 2)


def test_verify_hash_extractor_on_random_flat_sources():
    extractor = HashExtractor(ell=10, d=4, s=2, k=6, eps=0.25)
    sources = random_flat_sources(10, 6, 4, seed=5)
    assert all(len(set(src)) == 64 for src in sources)
    verdict = verify_extractor(extractor, sources)
    assert verdict.verified
    assert verdict.sources == 4
    assert verdict.max_tvd <= Fraction(1, 4)
    with pytest.raises(ResourceError):
        verify_extractor(extractor, sources, cap=100)


def test_sampler_bad_set():
    extractor = HashExtractor(ell=10, d=4, s=2, k=6, eps=0.25)
    bad = sampler_badset_count(extractor, bits_to_int, 0.25)
    # Only inputs whose seed map has rank below 2 are bad, x = 0 among them.
    assert 1 <= bad <= 256
    assert sampler_badset_count(extractor, lambda z: 0, 0.25) == 0
    with pytest.raises(ResourceError):
        sampler_badset_count(extractor, bits_to_int, 0.25, cap=1000)


def test_random_function_is_seeded():
    f = random_function(3, 5, seed=2)
    g = random_function(3, 5, seed=2)
    assert [f(z) for z in all_bitstrings(3)] == [g(z) for z in all_bitstrings(3)]
    assert all(0 <= f(z) < 5 for z in all_bitstrings(3))


def test_functional_forms_match_the_extractor_objects():
    x = (0, 0, 1, 1, 0, 1, 1, 0) + (0,) * 8
    assert walk_extract(x, (1, 0, 0, 0, 1, 0), 2, 1, 4) == (1, 1, 1, 0)

    source = tuple((k * 5) % 7 % 2 for k in range(64))
    seed = tuple((k // 3) % 2 for k in range(115))
    assert guv_ext(source, seed, 8, 0.125) == GuvExtractor(64, 8, 0.125)(source, seed)
    params = derive_guv_params(64, 8, 0.125)
    condenser_seed = seed[:params.seed_bits]
    condensed = guv_condense(source, condenser_seed, 8, 0.125)
    assert condensed == GuvCondenser(params)(source, condenser_seed)
    assert len(condensed) == 200
