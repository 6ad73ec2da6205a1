"""Feature-extraction tests, including a fully dense brute-force oracle."""

import numpy as np
import pytest
from scipy.linalg import expm
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pqklearn import sim
from pqklearn.features import (
    CacheFormatError,
    EncodingConfig,
    PqkFeatureMap,
    PqkFeatureSet,
    WallParams,
    extract_features,
    extract_features_batch,
    encode_state,
    load_features,
    sample_wall,
    save_features,
)
from test_sim import coupling_oracle, embed


def small_config(n_components=2, seed=4, **kw):
    return EncodingConfig(
        n_components=n_components, wall=sample_wall(n_components + 1, seed), **kw
    )


# --- sample_wall ---

def test_wall_is_deterministic():
    np.testing.assert_array_equal(sample_wall(3, 12).angles, sample_wall(3, 12).angles)


def test_wall_is_seed_sensitive():
    assert not np.array_equal(sample_wall(3, 12).angles, sample_wall(3, 13).angles)


def test_wall_angles_follow_uniform_law():
    angles = sample_wall(3334, 99).angles  # 10002 draws
    assert angles.min() >= 0.0 and angles.max() < 2 * np.pi
    assert abs(angles.mean() - np.pi) < 0.1


def test_wall_rejects_bad_size():
    with pytest.raises(ValueError):
        sample_wall(0, 1)


# --- EncodingConfig ---

def test_config_requires_matching_wall():
    with pytest.raises(ValueError):
        EncodingConfig(n_components=3, wall=sample_wall(3, 0))  # needs 4 qubits


def test_config_validates_fields():
    wall = sample_wall(3, 0)
    with pytest.raises(ValueError):
        EncodingConfig(n_components=2, wall=wall, trotter_steps=0)
    with pytest.raises(ValueError):
        EncodingConfig(n_components=2, wall=wall, angle_scale=0.0)


def test_config_digest_tracks_every_field():
    base = small_config()
    assert base.digest() == small_config().digest()
    variants = [
        small_config(seed=5),
        small_config(trotter_steps=7),
        small_config(angle_scale=1.0),
        small_config(n_components=3),
    ]
    digests = {base.digest()} | {v.digest() for v in variants}
    assert len(digests) == 5


# --- encode_state ---

def test_zero_input_gives_wall_only_state():
    cfg = small_config()
    state = encode_state(np.zeros(2), cfg)
    expected = sim.zero_state(3)
    for q in range(3):
        for a, axis in enumerate(sim.AXES):
            expected = sim.apply_rotation(expected, q, axis, cfg.wall.angles[q, a])
    np.testing.assert_allclose(state, expected, atol=1e-12)


def test_lone_component_is_trotter_invariant():
    x = np.array([0.0, 0.4])
    s1 = encode_state(x, small_config(trotter_steps=1))
    s2 = encode_state(x, small_config(trotter_steps=2))
    np.testing.assert_allclose(s1, s2, atol=1e-12)


def test_encode_state_rejects_wrong_length():
    with pytest.raises(ValueError):
        encode_state(np.zeros(3), small_config(n_components=2))


def test_encoded_state_matches_dense_unitary_oracle():
    """Build the whole circuit as explicit 8x8 matrix exponentials."""
    rng = np.random.default_rng(77)
    cfg = small_config(n_components=2, seed=8, trotter_steps=3, angle_scale=2.2)
    x = rng.uniform(-1, 1, size=2)
    n = 3
    U = np.eye(2**n, dtype=complex)
    for q in range(n):
        for a, axis in enumerate(sim.AXES):
            U = expm(-0.5j * cfg.wall.angles[q, a] * embed(sim.PAULIS[axis], q, n)) @ U
    for _ in range(cfg.trotter_steps):
        for j in range(2):
            U = coupling_oracle(cfg.angle_scale * x[j] / cfg.trotter_steps, j, j + 1, n) @ U
    psi = U @ sim.zero_state(n)
    np.testing.assert_allclose(encode_state(x, cfg), psi, atol=1e-9)


# --- extract_features ---

def test_identity_circuit_features():
    wall = WallParams(n_qubits=3, angles=np.zeros((3, 3)), seed=0)
    cfg = EncodingConfig(n_components=2, wall=wall)
    feats = extract_features(np.zeros(2), cfg)
    np.testing.assert_allclose(feats.reshape(3, 3), [[0, 0, 1]] * 3, atol=1e-12)


def test_features_are_physical():
    rng = np.random.default_rng(3)
    cfg = small_config(n_components=4, seed=2)
    for _ in range(5):
        f = extract_features(rng.uniform(-1, 1, size=4), cfg)
        assert np.all(np.abs(f) <= 1 + 1e-9)
        assert np.all((f.reshape(-1, 3) ** 2).sum(axis=1) <= 1 + 1e-8)


def test_features_match_direct_expectation_path():
    rng = np.random.default_rng(13)
    cfg = small_config(n_components=2, seed=6)
    x = rng.uniform(-1, 1, size=2)
    feats = extract_features(x, cfg)
    state = encode_state(x, cfg)
    for q in range(cfg.n_qubits):
        for a, axis in enumerate(sim.AXES):
            assert abs(feats[3 * q + a] - sim.pauli_expectation_direct(state, q, axis)) < 1e-10


def test_features_match_full_density_matrix_oracle():
    """Dense oracle: outer-product density matrix, explicit partial traces."""
    rng = np.random.default_rng(19)
    for n_components in (1, 2, 3):
        cfg = small_config(n_components=n_components, seed=23)
        x = rng.uniform(-1, 1, size=n_components)
        feats = extract_features(x, cfg)
        n = cfg.n_qubits
        psi = encode_state(x, cfg)
        rho_full = np.outer(psi, psi.conj()).reshape([2] * (2 * n))
        for q in range(n):
            rho = rho_full
            for other in sorted((o for o in range(n) if o != q), reverse=True):
                rho = np.trace(rho, axis1=other, axis2=other + rho.ndim // 2)
            for a, axis in enumerate(sim.AXES):
                expected = np.trace(rho @ sim.PAULIS[axis]).real
                assert abs(feats[3 * q + a] - expected) < 1e-9


def test_feature_continuity_in_the_input():
    cfg = small_config(n_components=3, seed=31)
    rng = np.random.default_rng(41)
    x = rng.uniform(-1, 1, size=3)
    f0 = extract_features(x, cfg)
    eps = 1e-6
    for j in range(3):
        xp = x.copy()
        xp[j] += eps
        assert np.linalg.norm(extract_features(xp, cfg) - f0) <= 100 * eps


# --- extract_features_batch ---

def test_batch_of_one_matches_single():
    cfg = small_config()
    x = np.array([0.2, -0.7])
    fs = extract_features_batch(x[None, :], cfg)
    np.testing.assert_array_equal(fs.values[0], extract_features(x, cfg))


def test_batch_is_parallelism_invariant():
    rng = np.random.default_rng(51)
    cfg = small_config(n_components=3, seed=1)
    X = rng.uniform(-1, 1, size=(16, 3))
    serial = extract_features_batch(X, cfg, n_jobs=1)
    parallel = extract_features_batch(X, cfg, n_jobs=4)
    np.testing.assert_array_equal(serial.values, parallel.values)
    assert serial.config_digest == parallel.config_digest


def test_batch_duplicates_rows_pointwise():
    cfg = small_config()
    X = np.array([[0.1, 0.3], [0.1, 0.3], [-0.5, 0.9]])
    fs = extract_features_batch(X, cfg)
    np.testing.assert_array_equal(fs.values[0], fs.values[1])


def test_batch_rejects_wrong_width():
    with pytest.raises(ValueError):
        extract_features_batch(np.zeros((4, 3)), small_config(n_components=2))


# --- cache round trips ---

def example_feature_set(n=5, cfg=None):
    cfg = cfg or small_config()
    rng = np.random.default_rng(61)
    return extract_features_batch(rng.uniform(-1, 1, size=(n, cfg.n_components)), cfg), cfg


def test_cache_round_trip_is_bitwise(tmp_path):
    fs, cfg = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    loaded = load_features(path, expected_digest=cfg.digest())
    np.testing.assert_array_equal(loaded.values, fs.values)
    assert loaded.config_digest == fs.config_digest


def test_cache_rejects_bad_magic(tmp_path):
    fs, _ = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheFormatError, match="magic"):
        load_features(path)


def test_cache_rejects_bad_version(tmp_path):
    fs, _ = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = (99).to_bytes(4, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheFormatError, match="version"):
        load_features(path)


def test_cache_rejects_other_config_digest(tmp_path):
    fs, _ = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    other = small_config(seed=999)
    with pytest.raises(CacheFormatError, match="config_digest"):
        load_features(path, expected_digest=other.digest())


def test_cache_rejects_truncation(tmp_path):
    fs, _ = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(OSError):
        load_features(path)


def test_cache_rejects_trailing_garbage(tmp_path):
    fs, _ = example_feature_set()
    path = tmp_path / "f.pqkf"
    save_features(fs, path)
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(CacheFormatError, match="payload"):
        load_features(path)


def test_feature_set_validates_range():
    with pytest.raises(ValueError):
        PqkFeatureSet(values=np.full((2, 6), 1.5), n_qubits=2, config_digest=bytes(32))


# --- estimator face ---

def test_feature_map_estimator_round_trip():
    rng = np.random.default_rng(71)
    X = rng.uniform(-1, 1, size=(6, 3))
    fm = PqkFeatureMap(trotter_steps=2, seed=5)
    out = fm.fit(X).transform(X)
    assert out.shape == (6, 12)
    assert fm.n_qubits_ == 4
    cfg = EncodingConfig(n_components=3, wall=sample_wall(4, 5), trotter_steps=2)
    np.testing.assert_array_equal(out, extract_features_batch(X, cfg).values)


def test_feature_map_is_cloneable_and_guards_fit():
    fm = PqkFeatureMap(seed=3, angle_scale=2.0)
    params = fm.get_params()
    assert params["seed"] == 3 and params["angle_scale"] == 2.0
    with pytest.raises(NotFittedError):
        fm.transform(np.zeros((2, 2)))
    clone(fm)  # sklearn clone contract
