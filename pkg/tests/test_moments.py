import numpy as np
import pytest

from conftest import random_direct_interpolant, random_stable_system, random_swapped_interpolant, rotation_block
from momabs import springmass
from momabs.linalg import StateSpaceModel
from momabs.moments import (
    DirectInterpolant,
    SwappedInterpolant,
    limiting_direct,
    limiting_swapped,
    moment_direct,
    moment_swapped,
    rom_direct,
    rom_swapped,
    rom_two_sided,
    tangential_mismatch_direct,
    tangential_mismatch_swapped,
    transfer_eval,
)


def siso_stable(rng, n=3):
    return random_stable_system(rng, n=n, m=1, p=1)


class TestMomentDirect:
    def test_golden_springmass(self):
        plant = springmass.concrete()
        interp = DirectInterpolant(s=springmass.abstract().a, l=springmass.l_hat())
        sol = moment_direct(plant, interp)
        assert np.abs(sol.pi - springmass.embedding_p()).max() < 1e-9
        assert np.abs(sol.moment - np.eye(2)).max() < 1e-9

    def test_zero_input_map(self, rng):
        sys = random_stable_system(rng, n=3, m=1, p=1)
        sys = StateSpaceModel(a=sys.a, b=np.zeros((3, 1)), c=sys.c)
        interp = DirectInterpolant(s=np.array([[0.0]]), l=np.array([[1.0]]))
        sol = moment_direct(sys, interp)
        assert np.abs(sol.pi).max() < 1e-12
        assert np.abs(sol.moment).max() < 1e-12

    def test_interpolation_at_origin(self, rng):
        sys = siso_stable(rng)
        interp = DirectInterpolant(s=np.array([[0.0]]), l=np.array([[1.0]]))
        sol = moment_direct(sys, interp)
        tf0 = sys.c @ np.linalg.solve(-sys.a, sys.b)
        assert np.abs(sol.moment - tf0).max() < 1e-10

    def test_overlapping_spectra_rejected(self, rng):
        sys = siso_stable(rng)
        lam = np.linalg.eigvals(sys.a)
        real = lam[np.abs(lam.imag) < 1e-9]
        if real.size == 0:
            pytest.skip("no real eigenvalue to collide with")
        interp = DirectInterpolant(s=np.array([[real[0].real]]), l=np.array([[1.0]]))
        with pytest.raises(ValueError, match="overlap"):
            moment_direct(sys, interp)


class TestMomentSwapped:
    def test_interpolation_at_origin(self, rng):
        sys = siso_stable(rng)
        interp = SwappedInterpolant(q=np.array([[0.0]]), r=np.array([[1.0]]))
        sol = moment_swapped(sys, interp)
        tf0 = sys.c @ np.linalg.solve(-sys.a, sys.b)
        assert np.abs(sol.moment - tf0).max() < 1e-10

    def test_zero_output_map(self, rng):
        sys = random_stable_system(rng, n=3, m=2, p=1)
        sys = StateSpaceModel(a=sys.a, b=sys.b, c=np.zeros((1, 3)))
        interp = SwappedInterpolant(q=np.array([[0.0]]), r=np.array([[1.0]]))
        sol = moment_swapped(sys, interp)
        assert np.abs(sol.upsilon).max() < 1e-12
        assert np.abs(sol.moment).max() < 1e-12


class TestInterpolantValidation:
    def test_unobservable_rejected(self):
        with pytest.raises(ValueError, match="observable"):
            DirectInterpolant(s=np.diag([1.0, 2.0]), l=np.zeros((1, 2)))

    def test_unreachable_rejected(self):
        with pytest.raises(ValueError, match="reachable"):
            SwappedInterpolant(q=np.diag([1.0, 2.0]), r=np.array([[1.0], [0.0]]))


class TestRomDirect:
    def test_moment_invariance_random(self, rng):
        for _ in range(5):
            sys = random_stable_system(rng, n=6, m=2, p=2)
            interp = random_direct_interpolant(rng, sys)
            g = rng.standard_normal((2, 2))
            rom = rom_direct(sys, interp, g)
            full = moment_direct(sys, interp).moment
            red = moment_direct(rom, interp).moment
            assert np.abs(full - red).max() < 1e-8 * max(1.0, np.abs(full).max())

    def test_zero_g_rejected(self, rng):
        sys = random_stable_system(rng, n=4, m=1, p=1)
        interp = random_direct_interpolant(rng, sys)
        with pytest.raises(ValueError, match="moment matching fails"):
            rom_direct(sys, interp, np.zeros((2, 1)))

    def test_transfer_interpolation_at_pm_i(self, rng):
        sys = siso_stable(rng)
        interp = DirectInterpolant(s=rotation_block(1.0), l=np.array([[1.0, 0.0]]))
        rom = rom_direct(sys, interp, rng.standard_normal((2, 1)))
        for s in (1j, -1j):
            tf_full = transfer_eval(sys, s)
            tf_rom = transfer_eval(rom, s)
            assert np.abs(tf_full - tf_rom).max() < 1e-8


class TestRomSwapped:
    def test_moment_invariance_random(self, rng):
        for _ in range(5):
            sys = random_stable_system(rng, n=6, m=2, p=2)
            interp = random_swapped_interpolant(rng, sys)
            h = rng.standard_normal((2, 2))
            rom = rom_swapped(sys, interp, h)
            full = moment_swapped(sys, interp).moment
            red = moment_swapped(rom, interp).moment
            assert np.abs(full - red).max() < 1e-8 * max(1.0, np.abs(full).max())

    def test_zero_h_rejected(self, rng):
        sys = random_stable_system(rng, n=4, m=1, p=1)
        interp = random_swapped_interpolant(rng, sys)
        with pytest.raises(ValueError, match="moment matching fails"):
            rom_swapped(sys, interp, np.zeros((1, 2)))

    def test_transfer_interpolation(self, rng):
        sys = siso_stable(rng)
        interp = SwappedInterpolant(q=rotation_block(2.0), r=np.array([[1.0], [0.5]]))
        rom = rom_swapped(sys, interp, rng.standard_normal((1, 2)))
        tf_full = transfer_eval(sys, 2j)
        tf_rom = transfer_eval(rom, 2j)
        assert np.abs(tf_full - tf_rom).max() < 1e-8


class TestRomTwoSided:
    def test_both_moments_match(self, rng):
        for _ in range(3):
            sys = random_stable_system(rng, n=8, m=2, p=2)
            di = random_direct_interpolant(rng, sys, freq=1.3)
            si = random_swapped_interpolant(rng, sys, freq=2.7)
            rom = rom_two_sided(sys, di, si)
            md_full = moment_direct(sys, di).moment
            md_rom = moment_direct(rom, di).moment
            ms_full = moment_swapped(sys, si).moment
            ms_rom = moment_swapped(rom, si).moment
            assert np.abs(md_full - md_rom).max() < 1e-7 * max(1.0, np.abs(md_full).max())
            assert np.abs(ms_full - ms_rom).max() < 1e-7 * max(1.0, np.abs(ms_full).max())

    def test_transfer_match_at_all_points_siso(self, rng):
        sys = random_stable_system(rng, n=8, m=1, p=1)
        di = random_direct_interpolant(rng, sys, freq=1.1)
        si = random_swapped_interpolant(rng, sys, freq=3.2)
        rom = rom_two_sided(sys, di, si)
        for s in (1.1j, 3.2j):
            tf_full = transfer_eval(sys, s)
            tf_rom = transfer_eval(rom, s)
            rel = np.abs(tf_full - tf_rom).max() / max(1.0, np.abs(tf_full).max())
            assert rel < 1e-7

    def test_tangential_match_mimo(self, rng):
        sys = random_stable_system(rng, n=8, m=2, p=2)
        di = random_direct_interpolant(rng, sys, freq=1.1)
        si = random_swapped_interpolant(rng, sys, freq=3.2)
        rom = rom_two_sided(sys, di, si)
        assert tangential_mismatch_direct(sys, rom, di) < 1e-7
        assert tangential_mismatch_swapped(sys, rom, si) < 1e-7

    def test_coinciding_interpolants_rejected(self, rng):
        sys = random_stable_system(rng, n=6, m=1, p=1)
        di = random_direct_interpolant(rng, sys, freq=2.0)
        si = random_swapped_interpolant(rng, sys, freq=2.0)
        with pytest.raises(ValueError, match="disjoint"):
            rom_two_sided(sys, di, si)


class TestTransferEval:
    def test_resolvent_identity_springmass(self):
        sys = springmass.concrete()
        tf = transfer_eval(sys, 1.0)
        x = np.linalg.solve(np.eye(4) - sys.a, sys.b)
        assert np.abs(tf - sys.c @ x).max() < 1e-12

    def test_zero_input_map(self):
        sys = StateSpaceModel(a=-np.eye(2), b=np.zeros((2, 1)), c=np.eye(2))
        assert np.abs(transfer_eval(sys, 0.5)).max() == 0.0

    def test_scalar_system(self):
        sys = StateSpaceModel(a=np.array([[-1.0]]), b=np.array([[1.0]]), c=np.array([[1.0]]))
        assert abs(transfer_eval(sys, 0.0)[0, 0] - 1.0) < 1e-14

    def test_rejects_eigenvalue_point(self):
        sys = StateSpaceModel(a=np.array([[-1.0]]), b=np.array([[1.0]]), c=np.array([[1.0]]))
        with pytest.raises(ValueError, match="eigenvalue"):
            transfer_eval(sys, -1.0)


class TestLimitingModels:
    def test_direct_golden(self):
        plant = springmass.concrete()
        interp = DirectInterpolant(s=springmass.abstract().a, l=springmass.l_hat())
        sol = moment_direct(plant, interp)
        lim = limiting_direct(sol, interp)
        assert np.array_equal(lim.a, interp.s)
        assert np.abs(lim.b).max() == 0.0
        assert np.abs(lim.c - np.eye(2)).max() < 1e-9

    def test_direct_integrator(self):
        interp = DirectInterpolant(s=np.array([[0.0]]), l=np.array([[1.0]]))
        sys = StateSpaceModel(a=np.array([[-1.0]]), b=np.array([[1.0]]), c=np.array([[2.0]]))
        sol = moment_direct(sys, interp)
        lim = limiting_direct(sol, interp)
        # zero drift: constant output c_pi * w0
        assert np.abs(lim.a).max() == 0.0

    def test_swapped_shape(self, rng):
        sys = random_stable_system(rng, n=4, m=2, p=2)
        interp = random_swapped_interpolant(rng, sys)
        sol = moment_swapped(sys, interp)
        lim = limiting_swapped(sol, interp)
        assert np.array_equal(lim.a, interp.q)
        assert np.array_equal(lim.b, sol.moment)
        assert np.array_equal(lim.c, np.eye(2))
