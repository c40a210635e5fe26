import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockprobe.errors import DomainError, TruncationError
from fockprobe.fock import (
    FockDensity,
    FockState,
    auto_cutoff,
    dumps,
    loads,
    make_basis_state,
    make_coherent_state,
    make_mixed01,
    make_number_state,
    make_thermal_density,
    norm_sq,
    require_headroom,
    tensor,
    weighted_norm_sq,
)


def poisson_tail_by_summation(lam, cutoff):
    """1 - sum_{n<=cutoff} e^-lam lam^n / n!, summed term by term."""
    head = sum(math.exp(-lam) * lam**n / math.factorial(n) for n in range(cutoff + 1))
    return 1.0 - head


def test_number_state():
    s = make_number_state(0, 5)
    np.testing.assert_array_equal(s.amplitudes, [1, 0, 0, 0, 0, 0])
    s = make_number_state(3, 5)
    assert s.amplitude(3) == 1
    assert norm_sq(s) == 1


def test_number_state_out_of_range():
    with pytest.raises(DomainError):
        make_number_state(6, 5)


def test_amplitudes_are_read_only():
    s = make_number_state(1, 3)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1


def test_coherent_vacuum_limit():
    s, rep = make_coherent_state(0, 10)
    assert s.amplitude(0) == 1
    assert rep.tail_mass == 0


def test_coherent_mean_matches_poisson():
    s, _ = make_coherent_state(1, 20)
    mean = sum(n * abs(s.amplitude(n)) ** 2 for n in range(21))
    assert abs(mean - 1) < 1e-10


def test_coherent_amplitudes_match_direct_formula():
    alpha = 0.8 - 0.6j
    s, _ = make_coherent_state(alpha, 25)
    direct = np.array(
        [math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(26)]
    )
    direct /= np.linalg.norm(direct)
    np.testing.assert_allclose(s.amplitudes, direct, atol=1e-15)


def test_coherent_tail_small_cutoff():
    _, rep = make_coherent_state(1, 3)
    want = 1 - math.exp(-1) * (1 + 1 + 0.5 + 1 / 6)
    assert rep.tail_mass == pytest.approx(want, rel=1e-12)
    assert rep.tail_mass == pytest.approx(0.01899, abs=1e-5)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7, 2.0])
def test_coherent_tail_against_summation(alpha):
    for cutoff in (2, 5, 9, 14):
        _, rep = make_coherent_state(alpha, cutoff)
        assert rep.tail_mass == pytest.approx(poisson_tail_by_summation(alpha**2, cutoff), abs=1e-14)


def test_coherent_tail_monotone_and_small():
    tails = [make_coherent_state(2.0, n)[1].tail_mass for n in range(1, 31)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    for alpha in (0.5, 1.0, 1.5, 2.0):
        assert make_coherent_state(alpha, 30)[1].tail_mass < 1e-10


def test_thermal_zero_temperature():
    d, rep = make_thermal_density(0, 6)
    assert len(d.ensemble) == 1
    assert d.ensemble[0][1].amplitude(0) == 1
    assert rep.tail_mass == 0


def test_thermal_vacuum_weight_before_renormalization():
    d, rep = make_thermal_density(1, 30)
    raw_vacuum = d.ensemble[0][0] * (1 - rep.tail_mass)
    assert raw_vacuum == pytest.approx(0.5, abs=1e-15)
    assert rep.tail_mass == pytest.approx(0.5**31, rel=1e-12)


def truncated_thermal_mean(nbar, cutoff):
    """Renormalized mean of the geometric distribution on 0..cutoff, closed form."""
    q = nbar / (1 + nbar)
    n = cutoff
    # sum_{k<=n} k q^k = q (1 - (n+1) q^n + n q^(n+1)) / (1-q)^2 ; sum_{k<=n} q^k = (1 - q^(n+1)) / (1-q)
    return q * (1 - (n + 1) * q**n + n * q ** (n + 1)) / ((1 - q) * (1 - q ** (n + 1)))


def test_thermal_mean_occupation():
    d, _ = make_thermal_density(1, 30)
    assert d.mean_occupation() == pytest.approx(truncated_thermal_mean(1, 30), abs=1e-13)
    # at cutoff 30 the renormalized mean still sits 1.4e-8 below 1; two more levels reach 1e-8
    d, _ = make_thermal_density(1, 32)
    assert abs(d.mean_occupation() - 1) < 1e-8


@pytest.mark.parametrize("nbar", [0.0, 0.3, 1.0, 4.0])
def test_thermal_weights_sum_to_one(nbar):
    d, _ = make_thermal_density(nbar, 17)
    assert d.weights.sum() == pytest.approx(1, abs=1e-12)


def test_thermal_negative_nbar():
    with pytest.raises(DomainError):
        make_thermal_density(-0.1, 5)


def test_mixed01():
    assert [w for w, _ in make_mixed01(0, 3).ensemble] == [1, 0]
    assert [w for w, _ in make_mixed01(1, 3).ensemble] == [0, 1]
    w = [w for w, _ in make_mixed01(1 / 3, 3).ensemble]
    assert w == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(DomainError):
        make_mixed01(1.2, 3)


def test_tensor_basis_states():
    s = tensor(make_number_state(1, 3), make_number_state(0, 3))
    assert s.modes == 2
    assert s.amplitude(1, 0) == 1
    v = tensor(make_number_state(0, 3), make_number_state(0, 3))
    assert v.amplitude(0, 0) == 1


def test_tensor_cutoff_mismatch():
    with pytest.raises(DomainError):
        tensor(make_number_state(0, 3), make_number_state(0, 4))


def test_tensor_norm_and_associativity():
    a = make_coherent_state(0.4 + 0.2j, 10)[0]
    b = make_coherent_state(1.1, 10)[0]
    c = make_number_state(3, 10)
    assert norm_sq(tensor(a, b)) == pytest.approx(1, abs=1e-12)
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-15)


def test_norms():
    assert norm_sq(make_number_state(3, 5)) == 1
    assert norm_sq(FockState(2 * make_number_state(1, 3).amplitudes, 3)) == 4
    assert weighted_norm_sq(make_mixed01(0.5, 3)) == 1


def test_density_members_must_agree():
    with pytest.raises(DomainError):
        FockDensity(((0.5, make_number_state(0, 2)), (0.5, make_number_state(0, 3))))


def test_auto_cutoff():
    n = auto_cutoff(alpha=1.5, tail=1e-12)
    assert make_coherent_state(1.5, n)[1].tail_mass < 1e-12
    assert make_coherent_state(1.5, n - 1)[1].tail_mass >= 1e-12
    n = auto_cutoff(nbar=4, tail=1e-12)
    assert make_thermal_density(4, n)[1].tail_mass < 1e-12
    assert make_thermal_density(4, n - 1)[1].tail_mass >= 1e-12


def test_require_headroom():
    require_headroom(make_number_state(2, 5), 3, "test")
    with pytest.raises(TruncationError):
        require_headroom(make_number_state(3, 5), 3, "test")


@settings(max_examples=50)
@given(modes=st.integers(1, 3), cutoff=st.integers(0, 4), data=st.data())
def test_index_bijection(modes, cutoff, data):
    s = make_basis_state((0,) * modes, cutoff)
    occ = tuple(data.draw(st.integers(0, cutoff)) for _ in range(modes))
    assert s.occupation(s.index(occ)) == occ
    i = data.draw(st.integers(0, s.dim - 1))
    assert s.index(s.occupation(i)) == i


def test_json_round_trip(tmp_path):
    s = make_coherent_state(0.5 - 0.25j, 8)[0]
    back = loads(dumps(s))
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
    d = make_thermal_density(0.7, 6)[0]
    back = loads(dumps(d))
    assert isinstance(back, FockDensity)
    np.testing.assert_array_equal(back.weights, d.weights)
    two = tensor(s, s)
    assert loads(dumps(two)).modes == 2
