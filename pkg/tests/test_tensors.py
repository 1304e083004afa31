import numpy as np
import pytest

from crnf.hypersurfaces import flat, model_D, sphere
from crnf.linalg import principal_angle_gap
from crnf.tensors import (
    E_spaces,
    basis_change,
    cr_frame,
    cubic_form,
    frame_residual,
    gradient_spans,
    levi_matrix,
    nondegeneracy,
    psi,
    random_frame,
    tensors_report,
    third_tensor,
)
from conftest import perturbed_model


def test_frame_annihilates_defining_series():
    M = model_D(3, 6, (1.0, 0.5)).to_generic()
    frame = cr_frame(M)
    assert frame_residual(M, frame) < 1e-10


def test_sphere_levi_is_identity():
    g = levi_matrix(sphere(2, 6))
    assert np.linalg.norm(g - np.eye(2)) < 1e-12


def test_model_levi_pattern():
    g = levi_matrix(model_D(3, 6, (1.0, 0.5)))
    assert np.linalg.norm(g - np.diag([1.0, 1.0, 0.0])) < 1e-9


def test_model_third_tensor_matrix():
    M = model_D(3, 6, (1.0, 0.5))
    t = third_tensor(M)
    H = t.components[:, :, 0, 0]
    target = np.diag([1.0, 0.5, 1.0])
    assert np.max(np.abs(H - target)) < 1e-9


def test_psi_symmetry_in_first_slots():
    M = model_D(3, 6, (1.0, 0.5)).to_generic()
    t = psi(M, 2)
    c = t.components
    assert np.max(np.abs(c - np.swapaxes(c, 0, 1))) < 1e-9


def test_cubic_form_matches_third_tensor():
    M = model_D(3, 6, (1.0, 0.5))
    h = third_tensor(M).components[:, :, 0, 0]
    q = cubic_form(M).components[:, :, 0, 0]
    assert np.max(np.abs(q - 0.5j * h)) < 1e-8


def test_nondegeneracy_orders():
    assert nondegeneracy(sphere(2, 6).to_generic(), 3) == 1
    assert nondegeneracy(model_D(2, 6, (0.0,)).to_generic(), 3) == 2
    assert nondegeneracy(flat(2, 12).to_generic(), 5) is None


def test_frame_independence_of_E_spaces(rng):
    M = perturbed_model(2, 6, (1.0,), seed=5, amp=0.03).to_generic()
    base = cr_frame(M)
    Es1 = E_spaces(M, 2, base)
    Es2 = E_spaces(M, 2, random_frame(M, rng, base))
    for E1, E2 in zip(Es1, Es2):
        assert E1.dim == E2.dim
        if E1.dim:
            assert principal_angle_gap(E1.basis, E2.basis) < 1e-8


def test_word_spans_match_gradient_spans(rng):
    for seed in range(5):
        M = perturbed_model(2, 6, (1.0,), seed=seed, amp=0.03).to_generic()
        Es = E_spaces(M, 2)
        Gs = gradient_spans(M, 2)
        for E, G in zip(Es, Gs):
            assert E.dim == G.dim
            if E.dim:
                assert principal_angle_gap(E.basis, G.basis) < 1e-8


def test_basis_change_covariance():
    M = model_D(3, 6, (1.0, 0.5))
    t = psi(M.to_generic(), 1)
    B = np.diag([2.0, 1.0, 1.0]).astype(complex)
    t2 = basis_change(t, B, 1.0)
    g = t.components[:, :, 0]
    g2 = t2.components[:, :, 0]
    assert np.max(np.abs(g2 - B @ g @ B.conj().T)) < 1e-9 or np.max(
        np.abs(g2 - B.conj().T @ g @ B)
    ) < 1e-9


def test_tensors_report_sphere():
    rep = tensors_report(sphere(2, 6))
    assert rep["k_nondeg"] == 1
