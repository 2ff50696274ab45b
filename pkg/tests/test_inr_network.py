import numpy as np
import pytest
from scipy.special import expit

from tomouq import NumericError, ShapeError
from tomouq.inr import (
    DropoutMask,
    InrModel,
    MlpArchitecture,
    embed,
    forward,
    init_model,
    load_model,
    make_embedding,
    render_image,
    sample_dropout_mask,
    save_model,
)
from tomouq.inr.network import param_count


# ------------------------------------------------------------- embedding


def test_rff_at_origin():
    emb = make_embedding("rff", m=8, omega0=5.0, seed=3)
    feats = embed(np.array([[0.0, 0.0]]), emb)
    assert feats.shape == (1, 16)
    assert np.allclose(feats[0, :8], 1.0)  # cosine block
    assert np.allclose(feats[0, 8:], 0.0)  # sine block


def test_rff_range_and_determinism():
    emb1 = make_embedding("rff", m=256, omega0=10.0, seed=42)
    emb2 = make_embedding("rff", m=256, omega0=10.0, seed=42)
    coords = np.array([[0.3, 0.7]])
    f1, f2 = embed(coords, emb1), embed(coords, emb2)
    assert np.array_equal(f1, f2)  # bitwise reproducible from the seed
    assert f1.min() >= -1.0 and f1.max() <= 1.0


def test_identity_embedding():
    emb = make_embedding("none")
    coords = np.array([[0.25, 0.5], [0.1, 0.9]])
    assert np.array_equal(embed(coords, emb), coords)


def test_positional_embedding_shape():
    emb = make_embedding("positional", m=4, omega0=8.0, seed=0)
    feats = embed(np.array([[0.5, 0.25]]), emb)
    assert feats.shape == (1, emb.output_dim)
    assert emb.output_dim == 16  # per-axis frequency ladder, cos+sin


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        make_embedding("wavelet")


# ------------------------------------------------------------- forward


def _tiny_model(depth=2, width=3, activation="tanh", dropout_p=0.0, seed=1):
    emb = make_embedding("rff", m=4, omega0=2.0, seed=0)
    arch = MlpArchitecture(depth=depth, width=width, activation=activation, dropout_p=dropout_p)
    return init_model(arch, emb, seed=seed)


def test_zero_parameters_give_half():
    model = _tiny_model()
    model.theta[:] = 0.0
    coords = np.random.default_rng(0).random((10, 2))
    assert np.allclose(forward(model, coords), 0.5)


def test_outputs_strictly_inside_unit_interval():
    model = _tiny_model(depth=3, width=8, activation="silu", seed=9)
    coords = np.random.default_rng(1).random((50, 2))
    values = forward(model, coords)
    assert np.all(values > 0.0) and np.all(values < 1.0)


def test_inactive_dropout_mask_is_identity():
    model = _tiny_model(dropout_p=0.0)
    coords = np.random.default_rng(2).random((20, 2))
    ones = DropoutMask(
        masks=[np.ones(model.embedding.output_dim), np.ones(model.arch.width)], p=0.0
    )
    assert np.array_equal(forward(model, coords), forward(model, coords, ones))


def test_mask_shape_validated():
    model = _tiny_model(dropout_p=0.5)
    bad = DropoutMask(masks=[np.ones(3)], p=0.5)
    with pytest.raises(ShapeError):
        forward(model, np.array([[0.5, 0.5]]), bad)


def test_nonfinite_parameter_names_layer():
    model = _tiny_model()
    model.theta[-1] = np.nan  # output bias
    with pytest.raises(NumericError, match="output layer"):
        forward(model, np.array([[0.5, 0.5]]))


def _manual_forward(model, coords, mask=None):
    """Straight-line reimplementation used as the oracle."""
    emb = model.embedding
    arch = model.arch
    phase = 2 * np.pi * coords @ emb.matrix_b.T
    x = np.concatenate([np.cos(phase), np.sin(phase)], axis=1)
    offset = 0
    dims = [(emb.output_dim, arch.width)]
    dims += [(arch.width, arch.width)] * (arch.depth - 1)
    dims += [(arch.width, 1)]
    acts = {
        "relu": lambda z: np.maximum(z, 0),
        "silu": lambda z: z * expit(z),
        "sine": lambda z: np.sin(arch.sine_omega * z),
        "softplus": lambda z: np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0),
        "tanh": np.tanh,
    }
    for i, (fi, fo) in enumerate(dims):
        w = model.theta[offset : offset + fi * fo].reshape(fi, fo)
        offset += fi * fo
        b = model.theta[offset : offset + fo]
        offset += fo
        if i < arch.depth and mask is not None:
            x = x * mask.masks[i] / (1.0 - mask.p)
        z = x @ w + b
        x = acts[arch.activation](z) if i < arch.depth else z
    return expit(x.ravel())


@pytest.mark.parametrize("activation", ["relu", "silu", "sine", "softplus", "tanh"])
def test_forward_matches_straight_line_oracle(activation):
    model = _tiny_model(depth=2, width=3, activation=activation, seed=5)
    coords = np.random.default_rng(3).random((17, 2))
    assert np.allclose(
        forward(model, coords), _manual_forward(model, coords), rtol=0, atol=1e-12
    )


def test_forward_with_mask_matches_oracle():
    model = _tiny_model(depth=3, width=4, activation="silu", dropout_p=0.4, seed=6)
    rng = np.random.default_rng(7)
    mask = sample_dropout_mask(model.arch, model.embedding.output_dim, rng)
    coords = rng.random((9, 2))
    assert np.allclose(
        forward(model, coords, mask), _manual_forward(model, coords, mask), atol=1e-12
    )


# ------------------------------------------------------------- rendering


def test_render_matches_per_pixel_forward():
    model = _tiny_model(depth=2, width=4, activation="silu", seed=8)
    image = render_image(model, (16, 16))
    from tomouq.geometry import normalized_pixel_centers

    coords = normalized_pixel_centers((16, 16))
    direct = np.array([forward(model, c[None, :])[0] for c in coords])
    assert np.allclose(image.ravel(), direct, atol=1e-14)


def test_render_deterministic_without_dropout():
    model = _tiny_model(dropout_p=0.3)
    a = render_image(model, (8, 8))
    b = render_image(model, (8, 8))
    assert np.array_equal(a, b)


# ------------------------------------------------------------- checkpoints


def test_checkpoint_roundtrip(tmp_path):
    model = _tiny_model(depth=3, width=5, activation="sine", dropout_p=0.2, seed=11)
    path = tmp_path / "model.ckpt"
    save_model(path, model)
    loaded = load_model(path)
    assert np.array_equal(loaded.theta, model.theta)
    assert loaded.arch == model.arch
    assert np.array_equal(loaded.embedding.matrix_b, model.embedding.matrix_b)
    # same renderings
    assert np.array_equal(render_image(loaded, (8, 8)), render_image(model, (8, 8)))


def test_param_count_consistency():
    arch = MlpArchitecture(depth=3, width=7, activation="relu")
    emb = make_embedding("rff", m=5, omega0=1.0, seed=0)
    model = init_model(arch, emb, seed=0)
    assert model.theta.size == param_count(arch, emb.output_dim)
    with pytest.raises(ShapeError):
        InrModel(embedding=emb, arch=arch, theta=np.zeros(3))
