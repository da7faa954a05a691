import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnivqa import percmodel as pm
from omnivqa.percmodel import (
    SOBEL_H,
    SOBEL_V,
    Head,
    LinearScorer,
    LossWeights,
    ModelError,
    Patch,
    PerceptualModel,
    TrainConfig,
    TrainingError,
    TrainingItem,
    aggregate,
    em_weight_vector,
    load_model,
    load_params,
    parse_config_text,
    prepare_sequence,
    preprocess,
    sample_patches,
    save_params,
    sobel,
    train,
    tv_penalty,
)


class LazyFrames:
    """Sequence of constant frames generated on access."""

    def __init__(self, count, width, height, value):
        self.count, self.width, self.height, self.value = count, width, height, value
        self.accessed = []

    def __len__(self):
        return self.count

    def __getitem__(self, idx):
        self.accessed.append(idx)
        return np.full((self.height, self.width), self.value, dtype=np.uint8)


def synthetic_items(seed, n_items=20, n=4, size=8):
    """Items whose DMOS is an affine function of the EM-weighted mean patch error."""
    r = np.random.default_rng(seed)
    items = []
    for _ in range(n_items):
        level = r.uniform(0.02, 0.6)
        err = np.clip(r.uniform(0, 2 * level, (n, size, size)), 0, 1)
        pix = r.uniform(0, 255, (n, size, size))
        w = r.random(n)
        w /= w.sum()
        pooled = w @ err.reshape(n, -1).mean(axis=1)
        items.append(TrainingItem(pix, err, w, 10 + 100 * pooled))
    return items


def random_model(r):
    scorer = LinearScorer(r.normal(0, 1, 6))
    return PerceptualModel(scorer, Head.random(r, scale=0.3))


def rmse(model, items):
    pred = np.array([model.predict(it) for it in items])
    return float(np.sqrt(np.mean((pred - [it.dmos for it in items]) ** 2)))


# -- preprocessing ----------------------------------------------------------------

def test_preprocess_4k_sequence():
    ref = LazyFrames(90, 3840, 1920, 100)
    imp = LazyFrames(90, 3840, 1920, 120)
    pairs = preprocess(ref, imp)
    assert [p.index for p in pairs] == [0, 45]
    for p in pairs:
        assert p.ref.shape == (480, 960)
        np.testing.assert_allclose(p.error, 20 / 255, atol=1e-12)
    assert sorted(set(ref.accessed)) == [0, 45]


def test_preprocess_identical_sequences_zero_error(rng):
    frames = [rng.integers(0, 256, (64, 128)).astype(np.uint8) for _ in range(3)]
    for p in preprocess(frames, frames, width=64, interval=1):
        assert p.ref.shape == (32, 64)
        assert not p.error.any()


def test_preprocess_single_frame():
    frame = np.zeros((480, 960))
    pairs = preprocess([frame], [frame])
    assert len(pairs) == 1 and pairs[0].index == 0


def test_preprocess_errors():
    frame = np.zeros((8, 16))
    with pytest.raises(ModelError):
        preprocess([frame, frame], [frame])
    with pytest.raises(ModelError):
        preprocess([], [])


def test_resize_plane_constant_and_identity(rng):
    plane = rng.random((20, 40))
    np.testing.assert_array_equal(pm.resize_plane(plane, 40, 20), plane)
    np.testing.assert_allclose(pm.resize_plane(np.full((20, 40), 7.0), 13, 7), 7.0)


def test_error_map_in_unit_range(rng):
    a = rng.integers(0, 256, (10, 10))
    b = rng.integers(0, 256, (10, 10))
    e = pm.error_map(a, b)
    assert e.min() >= 0 and e.max() <= 1
    assert pm.error_map(np.zeros(3), np.full(3, 255)).tolist() == [1.0, 1.0, 1.0]


# -- sampling -----------------------------------------------------------------

def test_candidate_grid_stride():
    tops, lefts = pm.candidate_grid(224, 336)
    assert tops.tolist() == [0, 56, 112]
    assert lefts.tolist() == [0, 56, 112, 168, 224]


def test_footprint_sums_match_direct_sums(rng):
    plane = rng.random((40, 50))
    tops, lefts = pm.candidate_grid(40, 50, 16, 8)
    sums = pm._footprint_sums(plane, 16, tops, lefts)
    for i, t in enumerate(tops):
        for j, l in enumerate(lefts):
            assert sums[i, j] == pytest.approx(plane[t:t + 16, l:l + 16].sum(), rel=1e-12)


def test_single_footprint_mass_drawn_first():
    frame = np.zeros((224, 224))
    hm = np.zeros((224, 224))
    hm[0, 0] = 1.0  # only the top-left candidate covers this pixel
    for seed in range(20):
        with pytest.warns(RuntimeWarning):  # remaining draws have no HM mass left
            patches = sample_patches(frame, frame, hm, 3, seed=seed)
        assert (patches[0].top, patches[0].left) == (0, 0)
        assert patches[0].hm_weight == 1.0
        assert all(p.hm_weight == 0.0 for p in patches[1:])


def test_uniform_hm_gives_uniform_frequencies():
    # 3x3 candidate grid of 2x2 patches keeps 10,000 trials cheap
    frame = np.zeros((4, 4))
    hm = np.ones((4, 4))
    gen = np.random.default_rng(7)
    trials = 10_000
    counts = {}
    for _ in range(trials):
        p = sample_patches(frame, frame, hm, 1, seed=gen, size=2, stride=1)[0]
        counts[(p.top, p.left)] = counts.get((p.top, p.left), 0) + 1
    assert len(counts) == 9
    prob = 1 / 9
    sigma = np.sqrt(trials * prob * (1 - prob))
    for c in counts.values():
        assert abs(c - trials * prob) < 3 * sigma


def test_zero_hm_falls_back_to_uniform_with_warning():
    frame = np.zeros((224, 224))
    with pytest.warns(RuntimeWarning, match="uniform"):
        patches = sample_patches(frame, frame, np.zeros((224, 224)), 4, seed=0)
    assert len({(p.top, p.left) for p in patches}) == 4


def test_sampling_without_replacement(rng):
    frame = rng.random((224, 224))
    patches = sample_patches(frame, frame, rng.random((224, 224)), 9, seed=1)
    assert len({(p.top, p.left) for p in patches}) == 9
    for p in patches:
        assert p.pixels.shape == (112, 112)
        np.testing.assert_array_equal(p.pixels, frame[p.top:p.top + 112, p.left:p.left + 112])


def test_sampling_errors():
    with pytest.raises(ModelError):
        sample_patches(np.zeros((100, 200)), np.zeros((100, 200)), np.ones((100, 200)), 1)
    frame = np.zeros((224, 224))
    with pytest.raises(ModelError):
        sample_patches(frame, frame, np.ones((224, 224)), 10)
    with pytest.raises(ModelError):
        sample_patches(frame, frame, np.ones((224, 224)), 0)
    with pytest.raises(ModelError):
        sample_patches(frame, frame, np.ones((224, 112)), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_sampling_bit_reproducible(seed, n):
    r = np.random.default_rng(seed)
    frame = r.random((224, 224))
    hm = r.random((224, 224))
    a = sample_patches(frame, frame, hm, n, seed=seed)
    b = sample_patches(frame, frame, hm, n, seed=seed)
    assert [(p.top, p.left, p.hm_weight) for p in a] == [(p.top, p.left, p.hm_weight) for p in b]


# -- EM weights ---------------------------------------------------------------

def _patch(top, left, size=2, frame=0):
    return Patch(np.zeros((size, size)), np.zeros((size, size)), frame, top, left, 1.0)


def test_em_weight_single_patch():
    assert em_weight_vector([_patch(0, 0)], np.ones((4, 4))).tolist() == [1.0]


def test_em_weight_normalization_example():
    em = np.zeros((2, 4))
    em[:, 0:2] = 0.75  # footprint sum 3
    em[:, 2:4] = 0.25  # footprint sum 1
    np.testing.assert_allclose(em_weight_vector([_patch(0, 0), _patch(0, 2)], em), [0.75, 0.25],
                               rtol=1e-15)


def test_em_weight_equal_sums():
    w = em_weight_vector([_patch(0, 2 * k) for k in range(5)], np.ones((2, 10)))
    np.testing.assert_allclose(w, 0.2, rtol=1e-15)


def test_em_weight_per_frame_mapping():
    maps = {0: np.ones((2, 2)), 3: np.full((2, 2), 3.0)}
    w = em_weight_vector([_patch(0, 0, frame=0), _patch(0, 0, frame=3)], maps)
    np.testing.assert_allclose(w, [0.25, 0.75])


def test_em_weight_zero_mass_warns():
    with pytest.warns(RuntimeWarning):
        w = em_weight_vector([_patch(0, 0), _patch(0, 2)], np.zeros((2, 4)))
    assert w.tolist() == [0.5, 0.5]
    with pytest.raises(ModelError):
        em_weight_vector([], np.ones((2, 2)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_em_weight_sums_to_one(seed, n):
    r = np.random.default_rng(seed)
    em = r.random((16, 16)) * 10.0 ** r.uniform(-6, 6)
    patches = [_patch(int(r.integers(0, 13)), int(r.integers(0, 13)), size=4) for _ in range(n)]
    assert abs(em_weight_vector(patches, em).sum() - 1.0) < 1e-12


# -- aggregation ---------------------------------------------------------------

def aggregate_oracle(scores, weights, head):
    pooled = sum(s * w for s, w in zip(scores, weights))
    out = head.b2
    for k in range(len(head.w1)):
        out += head.w2[k] * max(head.w1[k] * pooled + head.b1[k], 0.0)
    return out


def test_aggregate_identity_head_is_weighted_mean(rng):
    q = rng.uniform(0, 100, 6)
    w = rng.random(6)
    w /= w.sum()
    assert aggregate(q, w, Head.identity()) == pytest.approx(q @ w, rel=1e-14)


def test_aggregate_constant_scores(rng):
    w = rng.random(5)
    w /= w.sum()
    assert aggregate(np.full(5, 37.5), w, Head.identity()) == pytest.approx(37.5, rel=1e-14)


def test_aggregate_matches_oracle(rng):
    for _ in range(50):
        n = int(rng.integers(1, 10))
        q = rng.normal(0, 10, n)
        w = rng.random(n)
        w /= w.sum()
        head = Head(rng.normal(size=8), rng.normal(size=8), rng.normal(size=8), float(rng.normal()))
        assert abs(aggregate(q, w, head) - aggregate_oracle(q, w, head)) < 1e-12


def test_aggregate_length_mismatch():
    with pytest.raises(ModelError):
        aggregate([1.0, 2.0], [1.0], Head.identity())


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 5), st.floats(0, 5))
def test_aggregate_linear_in_linear_region(seed, a, b):
    r = np.random.default_rng(seed)
    q1, q2 = r.uniform(0, 50, 4), r.uniform(0, 50, 4)
    w = r.random(4)
    w /= w.sum()
    head = Head.identity()
    lhs = aggregate(a * q1 + b * q2, w, head)
    rhs = a * aggregate(q1, w, head) + b * aggregate(q2, w, head)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_head_flat_round_trip(rng):
    head = Head.random(rng)
    back = Head.from_flat(head.flat())
    np.testing.assert_array_equal(back.flat(), head.flat())
    with pytest.raises(ModelError):
        Head.from_flat(np.zeros(5))


# -- Sobel and total variation ----------------------------------------------------

def test_sobel_matches_scipy(rng):
    from scipy import ndimage

    x = rng.random((9, 7))
    np.testing.assert_allclose(sobel(x, SOBEL_H), ndimage.sobel(x, axis=1, mode="reflect"), atol=1e-13)
    np.testing.assert_allclose(sobel(x, SOBEL_V), ndimage.sobel(x, axis=0, mode="reflect"), atol=1e-13)


def test_sobel_rejects_other_kernels():
    with pytest.raises(ModelError):
        sobel(np.zeros((3, 3)), np.ones((3, 3)))


def test_sobel_adjoint_identity(rng):
    x = rng.random((3, 7, 5))
    y = rng.random((3, 7, 5))
    for d in "hv":
        lhs = np.sum(pm._correlate_padded(pm._reflect_pad(x), d) * y)
        rhs = np.sum(x * pm._fold_pad(pm._correlate_adjoint(y, d)))
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_tv_step_edge_literal():
    # columns 0 0 1 with mirrored borders: horizontal responses per row are 0, 4, 4
    m = np.array([[0.0, 0.0, 1.0]] * 3)
    per_row = [0.0, 4.0, 4.0]
    expected = sum(abs(g) ** 3 for g in per_row) * 3 / 9
    assert expected == 384 / 9
    assert tv_penalty(m[None]) == expected


def test_tv_constant_maps_zero():
    assert tv_penalty(np.full((3, 5, 5), 2.5)) == 0.0
    value, grad = tv_penalty(np.full((2, 4, 4), -1.0), with_grad=True)
    assert value == 0.0 and not grad.any()


def test_tv_exponent_half_is_gradient_magnitude(rng):
    m = rng.random((2, 6, 6))
    gh, gv = sobel(m, SOBEL_H), sobel(m, SOBEL_V)
    assert tv_penalty(m, 0.5) == pytest.approx(np.sqrt(gh ** 2 + gv ** 2).sum() / 72, rel=1e-12)


def test_tv_gradient_finite_difference(rng):
    m = rng.random((2, 6, 6))
    _, grad = tv_penalty(m, with_grad=True)
    fd = np.empty_like(m)
    for idx in np.ndindex(m.shape):
        up, dn = m.copy(), m.copy()
        up[idx] += 1e-6
        dn[idx] -= 1e-6
        fd[idx] = (tv_penalty(up) - tv_penalty(dn)) / 2e-6
    np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-9)


# -- loss and gradients ------------------------------------------------------------

def test_zero_loss_triple(rng):
    scorer = LinearScorer(np.zeros(6))
    model = PerceptualModel(scorer, Head(np.zeros(8), np.zeros(8), np.zeros(8), 0.0))
    items = [TrainingItem(rng.random((3, 8, 8)), rng.random((3, 8, 8)), np.full(3, 1 / 3), 0.0)
             for _ in range(4)]
    terms, grad = model.loss(items)
    assert (terms.total, terms.mse, terms.tv, terms.l2) == (0.0, 0.0, 0.0, 0.0)
    assert not grad.any()


def test_loss_terms_compose(rng):
    model = random_model(rng)
    items = synthetic_items(3, n_items=4)
    lam = LossWeights(2.0, 3.0, 0.5)
    terms, _ = model.loss(items, lam)
    pred = np.array([model.predict(it) for it in items])
    mse = float(np.sum((pred - [it.dmos for it in items]) ** 2))
    maps = np.concatenate([model.scorer.forward(it.pixels, it.errors)[1] for it in items])
    assert terms.mse == pytest.approx(mse, rel=1e-12)
    assert terms.tv == pytest.approx(tv_penalty(maps), rel=1e-12)
    assert terms.l2 == pytest.approx(model.params @ model.params, rel=1e-12)
    assert terms.total == pytest.approx(2 * terms.mse + 3 * terms.tv + 0.5 * terms.l2, rel=1e-12)


def gradient_check(seed):
    """Worst relative error between the analytic and central-difference gradients."""
    r = np.random.default_rng(seed)
    model = random_model(r)
    items = []
    for _ in range(4):
        n = int(r.integers(1, 4))
        w = r.random(n)
        items.append(TrainingItem(r.uniform(0, 255, (n, 8, 8)), r.random((n, 8, 8)), w / w.sum(),
                                  float(r.uniform(0, 5))))
    lam = LossWeights(*r.uniform(0.1, 10, 3))
    base = model.params.copy()
    _, grad = model.loss(items, lam)
    step = 1e-5
    fd = np.empty_like(base)
    for i in range(len(base)):
        up, dn = base.copy(), base.copy()
        up[i] += step
        dn[i] -= step
        model.params = up
        f_up = model.loss(items, lam, with_grad=False)[0].total
        model.params = dn
        f_dn = model.loss(items, lam, with_grad=False)[0].total
        fd[i] = (f_up - f_dn) / (2 * step)
    model.params = base
    scale = np.maximum(np.abs(fd), np.abs(grad))
    return float(np.max(np.abs(grad - fd) / np.maximum(scale, 1e-3 * np.abs(fd).max())))


def test_gradient_check_random_instances():
    errors = [gradient_check(seed) for seed in range(20)]
    assert max(errors) < 1e-4


def test_linear_scorer_input_gradient(rng):
    scorer = LinearScorer(rng.normal(size=6))
    pix = rng.uniform(0, 255, (2, 5, 5))
    err = rng.random((2, 5, 5))
    ds = rng.normal(size=2)
    dm = rng.normal(size=(2, 5, 5))

    def objective(e):
        s, m, _ = scorer.forward(pix, e)
        return s @ ds + np.sum(m * dm)

    _, _, cache = scorer.forward(pix, err)
    _, d_err = scorer.backward(cache, ds, dm)
    peak = (0,) + tuple(int(i) for i in np.unravel_index(err[0].argmax(), (5, 5)))
    for idx in [(0, 1, 1), (1, 4, 2), peak]:
        up, dn = err.copy(), err.copy()
        up[idx] += 1e-7
        dn[idx] -= 1e-7
        assert d_err[idx] == pytest.approx((objective(up) - objective(dn)) / 2e-7, rel=1e-6, abs=1e-8)


def test_scorer_parameter_validation():
    with pytest.raises(ModelError):
        LinearScorer(np.zeros(3))
    model = PerceptualModel()
    with pytest.raises(ModelError):
        model.params = np.zeros(4)


def test_training_item_validation():
    with pytest.raises(ModelError):
        TrainingItem(np.zeros((2, 4, 4)), np.zeros((2, 4, 5)), np.ones(2) / 2, 0.0)
    with pytest.raises(ModelError):
        TrainingItem(np.zeros((2, 4, 4)), np.zeros((2, 4, 4)), np.ones(3) / 3, 0.0)


# -- training -------------------------------------------------------------------

def test_single_item_mse_monotone_first_epochs():
    item = synthetic_items(0, n_items=1)
    res = train(item, config=TrainConfig(epochs=10, seed=1))
    mse = [t.mse for t in res.history]
    assert len(mse) == 11
    assert all(b <= a for a, b in zip(mse, mse[1:]))
    assert mse[-1] < mse[0]


def test_pure_l2_shrinks_parameters():
    items = synthetic_items(0, n_items=5)
    start = PerceptualModel(LinearScorer(np.ones(6)), Head.identity())
    before = np.linalg.norm(start.params)
    cfg = TrainConfig(learning_rate=0.01, epochs=300, lambda_mse=0, lambda_tv=0)
    res = train(items, start, cfg)
    after = np.linalg.norm(res.model.params)
    assert after < 0.1 * before


def test_synthetic_recovery():
    items = synthetic_items(0)
    res = train(items, config=TrainConfig(learning_rate=0.05, epochs=600, seed=1))
    assert rmse(res.model, items) < 1.0
    assert rmse(res.model, synthetic_items(9)) < 1.0


def test_training_seed_reproducible():
    items = synthetic_items(1, n_items=8)
    cfg = TrainConfig(learning_rate=0.01, epochs=40, seed=5)
    a = train(items, config=cfg)
    b = train(items, config=cfg)
    np.testing.assert_array_equal(a.model.params, b.model.params)
    c = train(items, config=TrainConfig(learning_rate=0.01, epochs=40, seed=6))
    assert not np.array_equal(a.model.params, c.model.params)


def test_minibatch_training_runs():
    items = synthetic_items(1, n_items=8)
    res = train(items, config=TrainConfig(learning_rate=0.01, epochs=5, batch_size=3, seed=2))
    assert len(res.history) == 6
    assert res.history[-1].total < res.history[0].total


def test_full_batch_shuffle_invariance():
    items = synthetic_items(2, n_items=12)
    cfg = TrainConfig(learning_rate=0.01, epochs=50, seed=3)
    a = train(items, config=cfg).history[-1].total
    order = np.random.default_rng(0).permutation(len(items))
    b = train([items[i] for i in order], config=cfg).history[-1].total
    assert abs(a - b) < 1e-6


def test_non_finite_loss_raises():
    items = synthetic_items(0, n_items=3)
    items[1].dmos = float("inf")
    with pytest.raises(TrainingError, match="non-finite"):
        train(items, config=TrainConfig(epochs=2))
    with pytest.raises(ModelError):
        train([])


def test_history_matches_recomputed_loss():
    items = synthetic_items(4, n_items=6)
    cfg = TrainConfig(learning_rate=0.01, epochs=3, seed=1)
    res = train(items, config=cfg)
    final = res.model.loss(items, cfg.lambdas, with_grad=False)[0]
    assert res.history[-1].total == final.total
    start = PerceptualModel(LinearScorer(), Head.random(np.random.default_rng(1)))
    assert res.history[0].total == pytest.approx(start.loss(items, cfg.lambdas, with_grad=False)[0].total,
                                                 rel=1e-14)


def test_nadam_first_step_size():
    g = np.array([3.0, -0.5])
    out = pm.Nadam(2, TrainConfig(learning_rate=0.1)).step(np.zeros(2), g)
    # m1 = 0.1 g, v1 = 0.001 g^2: 0.9 * 0.1 / (1 - 0.81) + 0.1 / 0.1 = 1 + 9/19
    np.testing.assert_allclose(out, -0.1 * (1 + 9 / 19) * np.sign(g), rtol=1e-6)
    adam = pm.Nadam(2, TrainConfig(learning_rate=0.1, nesterov=False)).step(np.zeros(2), g)
    np.testing.assert_allclose(adam, -0.1 * np.sign(g), rtol=1e-6)


# -- configuration and persistence -------------------------------------------------

def test_parse_config_text():
    cfg = parse_config_text("learning_rate = 0.01\nepochs=5  # short run\n\nnesterov = false\n"
                            "tv-exponent = 0.5\n")
    assert cfg.learning_rate == 0.01 and cfg.epochs == 5
    assert cfg.nesterov is False and cfg.tv_exponent == 0.5
    assert cfg.beta1 == 0.9 and cfg.lambdas == LossWeights(1e3, 1.0, 5e-3)


def test_parse_config_errors():
    with pytest.raises(ModelError, match="line 2"):
        parse_config_text("epochs = 3\nnot a pair\n")
    with pytest.raises(ModelError, match="unknown"):
        parse_config_text("momentum = 3\n")
    with pytest.raises(ModelError, match="bad value"):
        parse_config_text("epochs = many\n")


def test_load_config(tmp_path):
    path = tmp_path / "train.cfg"
    path.write_text("seed = 9\n")
    assert pm.load_config(path).seed == 9


def test_save_load_round_trip(tmp_path, rng):
    model = random_model(rng)
    path = tmp_path / "model.bin"
    save_params(model, path)
    assert path.stat().st_size == 8 * len(model.params)
    manifest = (tmp_path / "model.bin.manifest").read_text().split("\n")
    assert manifest[0] == "scorer 6"
    arrays = load_params(path)
    assert list(arrays) == ["scorer", "head.w1", "head.b1", "head.w2", "head.b2"]
    np.testing.assert_array_equal(load_model(path).params, model.params)


def test_load_params_size_mismatch(tmp_path, rng):
    path = tmp_path / "model.bin"
    save_params(random_model(rng), path)
    path.write_bytes(path.read_bytes() + b"\0" * 8)
    with pytest.raises(ModelError):
        load_params(path)
    path.write_bytes(path.read_bytes()[:16])
    with pytest.raises(ModelError):
        load_params(path)


# -- sequence assembly ---------------------------------------------------------------

def test_prepare_sequence_splits_patches_over_frames(monkeypatch, rng):
    calls = []
    real = pm.sample_patches

    def spy(frame, error, hm, n, *args, **kwargs):
        out = real(frame, error, hm, n, *args, **kwargs)
        calls.append((out[0].frame_index, n))
        return out

    monkeypatch.setattr(pm, "sample_patches", spy)
    ref = [rng.integers(0, 256, (112, 224)).astype(np.uint8) for _ in range(5)]
    imp = [np.clip(f.astype(int) + 10, 0, 255).astype(np.uint8) for f in ref]
    hm = {f: np.ones((112, 224)) for f in range(5)}
    em = {f: rng.random((112, 224)) for f in range(5)}
    item = prepare_sequence(ref, imp, hm, em, n=5, dmos=42.0, seed=3, width=224, interval=2)
    assert calls == [(0, 2), (2, 2), (4, 1)]
    assert item.pixels.shape == (5, 112, 112)
    assert item.dmos == 42.0
    assert abs(item.weights.sum() - 1) < 1e-12
    assert item.errors.max() <= 1.0


def test_prepare_sequence_reproducible(rng):
    ref = [rng.integers(0, 256, (224, 448)).astype(np.uint8) for _ in range(2)]
    imp = [255 - f for f in ref]
    hm = [rng.random((224, 448)) for _ in range(2)]
    em = [rng.random((224, 448)) for _ in range(2)]
    a = prepare_sequence(ref, imp, hm, em, n=4, seed=11, width=224, interval=1)
    b = prepare_sequence(ref, imp, hm, em, n=4, seed=11, width=224, interval=1)
    np.testing.assert_array_equal(a.pixels, b.pixels)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert a.pixels.shape == (4, 112, 112)
