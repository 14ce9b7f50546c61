import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorekit.errors import DataIntegrityError, DomainError
from scorekit.grid import MAX_RADIUS, RngStream, dft2, gaussian_field, radial_frequency
from scorekit.spectral import (FlatSpectrum, SpectrumProfile, bin_index, bins_above,
                               corpus_profile, cutoff, cutoff_spectrum, default_bins, max_bins,
                               noise_profile, profile_from_spectrum, rapsd, snr_at)
from scorekit.schedule import NoiseSchedule


def brute_rapsd(x, bins):
    """Loop-based annulus averaging straight from the definition."""
    X = np.fft.fft2(x, axes=(0, 1), norm="ortho")
    p = (np.abs(X) ** 2).mean(axis=2)
    h, w = p.shape
    width = MAX_RADIUS / bins
    sums, counts = np.zeros(bins), np.zeros(bins)
    for ky in range(h):
        for kx in range(w):
            fy = ky / h if ky < (h + 1) // 2 else ky / h - 1
            fx = kx / w if kx < (w + 1) // 2 else kx / w - 1
            r = np.hypot(fy, fx)
            i = 0
            while r > (i + 1) * width and i < bins - 1:
                i += 1
            sums[i] += p[ky, kx]
            counts[i] += 1
    return sums / counts, counts


def test_rapsd_matches_loop_oracle(rng):
    x = rng.standard_normal((12, 10, 3))
    prof = rapsd(x, 7)
    power, counts = brute_rapsd(x, 7)
    np.testing.assert_array_equal(prof.count, counts)
    np.testing.assert_allclose(prof.power, power, rtol=1e-12)


def test_rapsd_energy_bookkeeping(rng):
    x = rng.standard_normal((16, 16, 1))
    prof = rapsd(x)
    total = np.sum(np.abs(dft2(x)) ** 2)
    assert prof.energy == pytest.approx(total, rel=1e-6)
    assert prof.count.sum() == 256


def test_rapsd_of_constant_image():
    prof = rapsd(np.full((16, 16, 1), 0.5))
    assert prof.power[0] > 0
    assert np.all(prof.power[1:] < 1e-20)


def test_rapsd_bins_and_frequencies():
    prof = rapsd(np.zeros((32, 32, 1)))
    assert prof.bins == default_bins(32, 32) == 16
    assert np.all(np.diff(prof.freq) > 0)
    assert prof.freq[0] == pytest.approx(MAX_RADIUS / 32)


def test_edge_radius_goes_to_lower_bin():
    # on a 4x4 grid with 2 bins, coefficient (1, 1) sits exactly on the edge sqrt(2)/4
    r = radial_frequency(4, 4)
    assert r[1, 1] == MAX_RADIUS / 2
    idx = bin_index(4, 4, 2)
    assert idx[1, 1] == 0
    assert idx[0, 0] == 0
    assert idx[2, 2] == 1


@pytest.mark.parametrize("bins", [1, 23])
def test_rapsd_rejects_bad_bin_counts(bins):
    with pytest.raises(DomainError):
        rapsd(np.zeros((32, 32, 1)), bins)
    assert max_bins(32, 32) == 22


def test_white_noise_rapsd_is_flat():
    x = RngStream(21).generator().standard_normal((1024, 64, 64, 1))
    prof = corpus_profile(x)
    assert np.max(np.abs(prof.power - 1.0)) < 0.05


def test_corpus_of_one_and_sign_symmetry(rng):
    x = rng.standard_normal((8, 8, 1))
    ref = rapsd(x)
    np.testing.assert_allclose(corpus_profile([x]).power, ref.power, rtol=1e-14)
    np.testing.assert_allclose(corpus_profile([x, -x]).power, ref.power, rtol=1e-14)


def test_corpus_profile_is_permutation_invariant(rng):
    xs = rng.standard_normal((20, 8, 8, 1))
    a = corpus_profile(xs)
    b = corpus_profile(xs[rng.permutation(20)])
    np.testing.assert_allclose(a.power, b.power, rtol=1e-12)


def test_corpus_profile_errors():
    with pytest.raises(DomainError):
        corpus_profile([])
    with pytest.raises(DomainError):
        corpus_profile([np.zeros((8, 8, 1)), np.zeros((8, 6, 1))])


def test_mixing_law(schedule):
    spec = FlatSpectrum(0.3)
    x0 = gaussian_field(spec, 32, 32, RngStream(31), n=512)
    p0 = profile_from_spectrum(spec, 32, 32)
    pT = noise_profile(32, 32)
    t = 300
    a = schedule.alpha_bar(t)
    gen = RngStream(32).generator()
    xt = np.sqrt(a) * x0 + np.sqrt(1 - a) * gen.standard_normal(x0.shape)
    got = corpus_profile(xt)
    expected = a * p0.power + (1 - a) * pT.power
    assert np.max(np.abs(got.power / expected - 1)) < 0.05


def test_noise_profile_modes():
    analytic = noise_profile(32, 32)
    assert np.all(analytic.power == 1.0)
    emp = noise_profile(32, 32, mode="empirical", n=1024, rng=RngStream(4))
    assert np.max(np.abs(emp.power / analytic.power - 1)) < 0.05
    again = noise_profile(32, 32, mode="empirical", n=1024, rng=RngStream(4))
    np.testing.assert_array_equal(emp.power, again.power)
    with pytest.raises(DomainError):
        noise_profile(32, 32, mode="empirical", n=1, rng=RngStream(4))


def test_snr_identity_at_half_alpha_bar():
    s = NoiseSchedule.from_betas([0.5, 0.5])
    p = noise_profile(8, 8)
    curve = snr_at(s, 1, p, p)
    np.testing.assert_allclose(curve.snr, 1.0)


def test_snr_monotone_in_t(schedule):
    p0 = profile_from_spectrum(lambda r: 0.01 / (r + 0.05) ** 2, 32, 32)
    pT = noise_profile(32, 32)
    snr = np.array([snr_at(schedule, t, p0, pT).snr for t in range(1, schedule.T + 1)])
    assert np.all(np.diff(snr, axis=0) <= 0)
    assert np.all(snr[-1] < 1e-3)


def test_snr_rejects_zero_noise_bin():
    p = noise_profile(8, 8)
    zero = SpectrumProfile(p.freq, np.zeros(p.bins), p.count)
    s = NoiseSchedule.from_betas([0.1])
    with pytest.raises(DomainError):
        snr_at(s, 1, p, zero)


def test_cutoff_identity_at_max_radius(rng):
    x = rng.standard_normal((16, 16, 1))
    assert np.max(np.abs(cutoff(x, MAX_RADIUS) - x)) < 1e-7


def test_cutoff_zero_keeps_constant():
    x = np.full((8, 8, 1), 0.25)
    np.testing.assert_allclose(cutoff(x, 0.0), x, atol=1e-15)


def test_cutoff_projection_properties(rng):
    x = rng.standard_normal((32, 32, 3))
    f = 0.3
    X = dft2(x)
    once = cutoff_spectrum(X, f)
    np.testing.assert_array_equal(cutoff_spectrum(once, f), once)
    r = radial_frequency(32, 32)
    assert np.all(once[r > f] == 0)
    np.testing.assert_array_equal(once[r <= f], X[r <= f])
    y = cutoff(x, f)
    assert np.sum(y ** 2) <= np.sum(x ** 2)
    assert np.max(np.abs(dft2(y)[r <= f] - X[r <= f])) < 1e-7
    prof = rapsd(y)
    above = bins_above(prof, f)
    assert above.any()
    assert np.all(prof.power[above] <= 1e-20 * prof.energy)


@pytest.mark.parametrize("f", [-0.01, 0.71])
def test_cutoff_range(f):
    with pytest.raises(DomainError):
        cutoff(np.zeros((4, 4, 1)), f)


@given(st.floats(0.0, MAX_RADIUS), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_cutoff_energy_non_increasing(f, seed):
    x = RngStream(seed).generator().standard_normal((8, 10, 1))
    y = cutoff(x, f)
    assert np.sum(y ** 2) <= np.sum(x ** 2) * (1 + 1e-12)
    z = cutoff(y, f)
    assert np.max(np.abs(z - y)) < 1e-12


def test_profile_csv_roundtrip(tmp_path, rng):
    prof = rapsd(rng.standard_normal((16, 16, 1)))
    path = tmp_path / "p.csv"
    prof.to_csv(path)
    assert path.read_text().splitlines()[0] == "freq,power,count"
    back = SpectrumProfile.from_csv(path)
    np.testing.assert_array_equal(back.power, prof.power)
    np.testing.assert_array_equal(back.freq, prof.freq)
    np.testing.assert_array_equal(back.count, prof.count)
    assert back.digest() == prof.digest()


def test_profile_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f,p,c\n0.1,1,1\n")
    with pytest.raises(DataIntegrityError):
        SpectrumProfile.from_csv(path)


def test_profile_interpolation_and_extrapolation():
    prof = SpectrumProfile([0.1, 0.2, 0.3], [4.0, 2.0, 1.0], [1, 1, 1])
    assert prof(0.15) == pytest.approx(3.0)
    assert prof(0.0) == 4.0
    assert prof(0.7) == 1.0


def test_profile_validation():
    with pytest.raises(DomainError):
        SpectrumProfile([0.2, 0.1], [1, 1], [1, 1])
    with pytest.raises(DomainError):
        SpectrumProfile([0.1, 0.2], [1, -1], [1, 1])
