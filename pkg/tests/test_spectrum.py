import numpy as np
import pytest

from besovlab.manifold import GridFunction, build_circle, lp_norm
from besovlab.spectrum import (CoefVector, apply_power, build_eigensystem,
                               check_orthonormality, load_eigensystem, project,
                               save_eigensystem, synthesize)


class TestBuild:
    def test_circle_small_band(self):
        es = build_eigensystem(build_circle(64), 10.0)
        assert es.eigenvalues.tolist() == [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0]

    def test_sphere_multiplicities(self, sphere16):
        es = build_eigensystem(sphere16, 7.0)
        vals, counts = np.unique(es.eigenvalues, return_counts=True)
        assert vals.tolist() == [0.0, 2.0, 6.0]
        assert counts.tolist() == [1, 3, 5]

    def test_mesh_second_eigenvalue_near_analytic(self, icosphere3_es):
        # unit sphere: lambda_1 = l(l+1) = 2
        assert icosphere3_es.eigenvalues[1] == pytest.approx(2.0, rel=0.1)

    def test_lambda0_constant_eigenfunction(self, circle1024_es, icosphere3_es):
        for es in (circle1024_es, icosphere3_es):
            assert es.eigenvalues[0] == 0.0
            u0 = es.eigenfunctions[:, 0]
            assert np.ptp(u0) < 1e-8 * np.abs(u0).max()

    def test_rejects_unresolved_band(self):
        m = build_circle(64)
        with pytest.raises(ValueError, match="unresolved"):
            build_eigensystem(m, 40000.0)

    def test_torus_eigenvalues_are_pair_sums(self, torus16):
        es = build_eigensystem(torus16, 8.0)
        expected = sorted(m1 * m1 + m2 * m2
                          for m1 in range(0, 3) for m2 in range(0, 3)
                          if m1 * m1 + m2 * m2 <= 8
                          for _ in range(max(1, 2 * (m1 > 0)) * max(1, 2 * (m2 > 0))))
        assert es.eigenvalues.tolist() == [float(v) for v in expected]


class TestOrthonormality:
    def test_circle_machine_precision(self, circle1024_es):
        assert check_orthonormality(circle1024_es) < 1e-12

    def test_single_eigenfunction_normalized(self, circle1024_es):
        u5 = circle1024_es.eigenfunctions[:, 5]
        w = circle1024_es.model.weights
        assert w @ (u5 * u5) == pytest.approx(1.0, abs=1e-12)

    def test_mesh_within_tolerance(self, icosphere3_es):
        assert check_orthonormality(icosphere3_es) < 1e-8

    def test_sphere_within_tolerance(self, sphere16_es):
        assert check_orthonormality(sphere16_es) < 1e-8

    def test_torus(self, torus16):
        es = build_eigensystem(torus16, 20.0)
        assert check_orthonormality(es) < 1e-12


class TestProjectSynthesize:
    def test_project_pure_eigenfunction(self, circle1024_es):
        f = GridFunction(circle1024_es.model,
                         circle1024_es.eigenfunctions[:, 5].copy())
        c = project(circle1024_es, f).coefficients
        expected = np.zeros(circle1024_es.n_eigen)
        expected[5] = 1.0
        assert np.abs(c - expected).max() < 1e-10

    def test_project_zero(self, circle1024_es):
        f = GridFunction(circle1024_es.model, np.zeros(1024))
        assert np.all(project(circle1024_es, f).coefficients == 0.0)

    def test_project_trig_combination(self, circle1024_es):
        x = circle1024_es.model.nodes[:, 0]
        f = GridFunction(circle1024_es.model, np.cos(3 * x) + 2 * np.sin(7 * x))
        c = project(circle1024_es, f).coefficients
        nz = np.nonzero(np.abs(c) > 1e-9)[0]
        labels = [circle1024_es.labels[i] for i in nz]
        assert labels == [("cos", 3), ("sin", 7)]
        assert c[nz[0]] == pytest.approx(np.sqrt(np.pi), rel=1e-12)
        assert c[nz[1]] == pytest.approx(2 * np.sqrt(np.pi), rel=1e-12)

    def test_roundtrip_bandlimited(self, circle1024_es, rng):
        c = CoefVector(rng.standard_normal(circle1024_es.n_eigen))
        f = synthesize(circle1024_es, c)
        back = project(circle1024_es, f).coefficients
        assert np.abs(back - c.coefficients).max() < 1e-10
        f2 = synthesize(circle1024_es, project(circle1024_es, f))
        assert np.abs(f2.values - f.values).max() < 1e-10

    def test_constant_coefficient(self, circle1024_es):
        c = np.zeros(circle1024_es.n_eigen)
        c[0] = 1.0
        f = synthesize(circle1024_es, CoefVector(c))
        assert np.allclose(f.values, 1 / np.sqrt(2 * np.pi), atol=1e-14)

    def test_parseval(self, circle1024_es, rng):
        c = rng.standard_normal(circle1024_es.n_eigen)
        f = synthesize(circle1024_es, CoefVector(c))
        assert lp_norm(circle1024_es.model, f, 2) ** 2 == pytest.approx(
            float(c @ c), abs=1e-10)

    def test_model_mismatch_rejected(self, circle1024_es):
        other = build_circle(64)
        f = GridFunction(other, np.zeros(64))
        with pytest.raises(ValueError):
            project(circle1024_es, f)

    def test_length_mismatch_rejected(self, circle1024_es):
        with pytest.raises(ValueError):
            synthesize(circle1024_es, CoefVector(np.ones(circle1024_es.n_eigen + 1)))


class TestApplyPower:
    def test_identity_at_zero(self, circle1024_es, rng):
        c = CoefVector(rng.standard_normal(circle1024_es.n_eigen))
        out = apply_power(circle1024_es, c, 0.0)
        assert np.array_equal(out.coefficients, c.coefficients)

    def test_single_mode(self, circle1024_es):
        c = np.zeros(circle1024_es.n_eigen)
        c[6] = 1.0
        out = apply_power(circle1024_es, CoefVector(c), 1.0).coefficients
        assert out[6] == circle1024_es.eigenvalues[6]
        assert np.count_nonzero(out) == 1

    def test_semigroup(self, circle1024_es, rng):
        c = CoefVector(rng.standard_normal(circle1024_es.n_eigen))
        twice = apply_power(circle1024_es, apply_power(circle1024_es, c, 0.5), 0.5)
        once = apply_power(circle1024_es, c, 1.0)
        assert np.abs(twice.coefficients - once.coefficients).max() < 1e-12

    def test_constant_survives_zero_power(self, circle1024_es):
        c = np.zeros(circle1024_es.n_eigen)
        c[0] = 3.0
        out = apply_power(circle1024_es, CoefVector(c), 0.0).coefficients
        assert out[0] == 3.0

    def test_rejects_negative(self, circle1024_es):
        with pytest.raises(ValueError):
            apply_power(circle1024_es, CoefVector(np.ones(3)), -0.5)


class TestJsonRoundTrip:
    def test_circle_roundtrip(self, tmp_path, circle1024_es):
        path = tmp_path / "es.json"
        save_eigensystem(circle1024_es, path)
        loaded = load_eigensystem(path, circle1024_es.model)
        assert np.array_equal(loaded.eigenvalues, circle1024_es.eigenvalues)
        assert np.array_equal(loaded.eigenfunctions, circle1024_es.eigenfunctions)
        assert loaded.labels == circle1024_es.labels

    def test_mesh_cache_roundtrip(self, tmp_path, icosphere3, icosphere3_es):
        path = tmp_path / "mesh-es.json"
        save_eigensystem(icosphere3_es, path)
        loaded = load_eigensystem(path, icosphere3)
        assert check_orthonormality(loaded) < 1e-8

    def test_model_mismatch_rejected(self, tmp_path, circle1024_es):
        path = tmp_path / "es.json"
        save_eigensystem(circle1024_es, path)
        with pytest.raises(ValueError):
            load_eigensystem(path, build_circle(64))
