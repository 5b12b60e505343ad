"""Diffusion model tests: schedule algebra, tokenization, conditioning,
zero-gate behavior, sampling determinism, and checkpoint round trips."""

import numpy as np
import pytest

from xvwm.errors import (ConfigurationError, FormatError, RangeError,
                         UsageError)
from xvwm.model import (Checkpoint, Denoiser, ModelConfig, NoiseSchedule,
                        collate, ddim_sample, ddim_timesteps, load_checkpoint,
                        load_model_tensors, model_tensors, patchify_raw,
                        pos_embed_2d, save_checkpoint, to_model_scale, to_u8,
                        training_loss, unpatchify_raw)
from xvwm.nn import AdamW, Tensor, mse_loss, no_grad
from xvwm.worldsim import ViewId


def tiny_config(**over) -> ModelConfig:
    kw = dict(image_size=16, patch=4, dim=32, layers=2, heads=2,
              context_len=2, freq_dim=16)
    kw.update(over)
    return ModelConfig(**kw)


def tiny_model(seed=0, **over) -> Denoiser:
    return Denoiser(tiny_config(**over), np.random.default_rng(seed))


def random_inputs(cfg, b=2, seed=1):
    rng = np.random.default_rng(seed)
    s, nc = cfg.image_size, cfg.context_len
    noisy = rng.standard_normal((b, s, s, 3)).astype(np.float32)
    ctx = rng.standard_normal((b, nc, s, s, 3)).astype(np.float32)
    rel = rng.uniform(-2, 2, b).astype(np.float32)
    cum = rng.uniform(-1, 1, (b, 3)).astype(np.float32)
    return noisy, ctx, rel, cum


# -- config -------------------------------------------------------------------

def test_config_json_round_trip():
    cfg = ModelConfig(views=(ViewId.EGO, ViewId.BEV, ViewId.FRONT))
    again = ModelConfig.from_json_dict(cfg.to_json_dict())
    assert again == cfg


def test_config_rejects_indivisible_patch():
    with pytest.raises(ConfigurationError):
        ModelConfig(image_size=60, patch=8).validate()


def test_config_rejects_indivisible_heads():
    with pytest.raises(ConfigurationError):
        ModelConfig(dim=130, heads=4).validate()


def test_view_row_unknown_view_is_usage_error():
    cfg = ModelConfig(views=(ViewId.EGO, ViewId.BEV))
    assert cfg.view_row(ViewId.BEV) == 1
    with pytest.raises(UsageError):
        cfg.view_row(ViewId.FRONT)


# -- noise schedule -----------------------------------------------------------

def test_alpha_bar_matches_independent_cumprod():
    sch = NoiseSchedule()
    betas = np.linspace(1e-4, 0.07, 100)
    expect = np.cumprod(1.0 - betas)
    assert np.allclose(sch.alpha_bar, expect, rtol=1e-12)
    assert (np.diff(sch.alpha_bar) < 0).all()
    assert sch.alpha_bar[0] > 0.999
    assert sch.alpha_bar[-1] < 0.05


def test_schedule_rejects_endpoint_that_never_noises():
    # a 0.02 endpoint over 100 steps leaves alpha-bar at 0.36
    with pytest.raises(ConfigurationError):
        NoiseSchedule(beta_start=1e-4, beta_end=2e-2)


def test_schedule_rejects_noisy_start():
    with pytest.raises(ConfigurationError):
        NoiseSchedule(beta_start=0.01, beta_end=0.07)


def test_q_sample_zero_eps_is_scaled_x0():
    sch = NoiseSchedule()
    x0 = np.random.default_rng(0).uniform(-1, 1, (2, 4, 4, 3)).astype(np.float32)
    for t in (0, 37, 99):
        xt = sch.q_sample(x0, np.array([t, t]), np.zeros_like(x0))
        assert np.allclose(xt, np.sqrt(sch.alpha_bar[t]) * x0, atol=1e-7)


def test_q_sample_t0_close_to_x0():
    sch = NoiseSchedule()
    rng = np.random.default_rng(1)
    x0 = rng.uniform(-1, 1, (4, 8, 8, 3)).astype(np.float32)
    eps = rng.standard_normal(x0.shape).astype(np.float32)
    xt = sch.q_sample(x0, 0, eps)
    # sqrt(1 - 0.9999) = 1e-2 puts the perturbation at the percent level
    assert np.abs(xt - x0).max() < 0.06


def test_q_sample_variance_matches_schedule():
    sch = NoiseSchedule()
    rng = np.random.default_rng(2)
    n = 100_000
    for t in (1, 50, 99):
        eps = rng.standard_normal((n, 1, 1, 1)).astype(np.float32)
        xt = sch.q_sample(np.zeros_like(eps), np.full(n, t), eps)
        var = float(xt.var())
        want = 1.0 - sch.alpha_bar[t]
        assert abs(var - want) / want < 0.02, (t, var, want)


def test_q_sample_rejects_out_of_range_t():
    sch = NoiseSchedule()
    x = np.zeros((1, 2, 2, 3), np.float32)
    with pytest.raises(RangeError):
        sch.q_sample(x, -1, x)
    with pytest.raises(RangeError):
        sch.q_sample(x, 100, x)


# -- tokenization -------------------------------------------------------------

def test_token_count_64_for_default_config():
    assert ModelConfig().tokens_per_frame == 64
    frame = np.zeros((64, 64, 3), np.float32)
    assert patchify_raw(frame, 8).shape == (64, 192)


def test_patchify_round_trip_bit_exact():
    rng = np.random.default_rng(3)
    frames = rng.integers(0, 256, (2, 3, 32, 32, 3)).astype(np.float32)
    tokens = patchify_raw(frames, 8)
    back = unpatchify_raw(tokens, 8, 32)
    assert back.dtype == frames.dtype
    assert np.array_equal(back, frames)


def test_constant_image_gives_identical_patches():
    frame = np.full((16, 16, 3), 0.25, np.float32)
    tokens = patchify_raw(frame, 4)
    assert np.array_equal(tokens, np.broadcast_to(tokens[0], tokens.shape))


def test_patchify_rejects_bad_size():
    with pytest.raises(UsageError):
        patchify_raw(np.zeros((10, 10, 3), np.float32), 4)


def test_pos_embed_rows_distinct():
    emb = pos_embed_2d(32, 4)
    assert emb.shape == (16, 32)
    dists = np.linalg.norm(emb[:, None] - emb[None, :], axis=-1)
    assert (dists + np.eye(16)).min() > 0


# -- conditioning -------------------------------------------------------------

def test_conditioning_view_changes_by_embedding_row_difference():
    model = tiny_model()
    cum = np.array([[0.3, -0.2, 0.9]], np.float32)
    c0 = model.conditioning(np.array([10]), np.array([0.5]), cum, [0])
    c1 = model.conditioning(np.array([10]), np.array([0.5]), cum, [1])
    table = model.cond.view_table.weight.data
    assert np.allclose(c0.data - c1.data, table[0] - table[1], atol=1e-6)


def test_conditioning_wraps_yaw_through_the_circle():
    model = tiny_model()
    c_pos = model.conditioning(np.array([4]), np.array([1.0]),
                               np.array([[0.1, 0.2, np.pi]]), [0])
    c_neg = model.conditioning(np.array([4]), np.array([1.0]),
                               np.array([[0.1, 0.2, -np.pi]]), [0])
    assert np.allclose(c_pos.data, c_neg.data, atol=1e-6)


def test_conditioning_dimension():
    model = tiny_model()
    b = 5
    rng = np.random.default_rng(4)
    c = model.conditioning(rng.integers(0, 100, b), rng.uniform(-2, 2, b),
                           rng.uniform(-1, 1, (b, 3)),
                           rng.integers(0, 2, b))
    assert c.shape == (b, 32)


def test_conditioning_rejects_out_of_range_t():
    model = tiny_model()
    with pytest.raises(UsageError):
        model.conditioning(np.array([100]), np.zeros(1), np.zeros((1, 3)), [0])


def test_conditioning_rejects_unknown_view():
    model = tiny_model()
    with pytest.raises(UsageError):
        model.conditioning(np.array([1]), np.zeros(1), np.zeros((1, 3)),
                           [ViewId.FRONT])


# -- denoiser forward ---------------------------------------------------------

def test_zero_gate_output_is_head_of_projected_input():
    cfg = tiny_config()
    model = tiny_model()
    noisy, ctx, rel, cum = random_inputs(cfg)
    c = model.conditioning(np.array([3, 60]), rel, cum, [0, 1])
    out = model.forward(noisy, ctx, c)

    tokens = patchify_raw(noisy, cfg.patch)
    z = tokens @ model.tgt_proj.weight.data + model.tgt_proj.bias.data
    z = z + model.pos.data
    y = z @ model.head.weight.data + model.head.bias.data
    manual = unpatchify_raw(y, cfg.patch, cfg.image_size)
    assert np.abs(out.data - manual).max() < 1e-6


def test_zero_gate_output_ignores_context_and_conditioning():
    cfg = tiny_config()
    model = tiny_model()
    noisy, ctx, rel, cum = random_inputs(cfg)
    rng = np.random.default_rng(9)
    ctx2 = rng.standard_normal(ctx.shape).astype(np.float32)
    c1 = model.conditioning(np.array([3, 60]), rel, cum, [0, 1])
    c2 = model.conditioning(np.array([99, 0]), -rel, -cum, [1, 0])
    out1 = model.forward(noisy, ctx, c1)
    out2 = model.forward(noisy, ctx2, c2)
    assert np.abs(out1.data - out2.data).max() < 1e-6


def test_forward_output_shape():
    cfg = tiny_config()
    model = tiny_model()
    noisy, ctx, rel, cum = random_inputs(cfg, b=3)
    c = model.conditioning(np.array([1, 2, 3]), rel, cum, [0, 1, 0])
    assert model.forward(noisy, ctx, c).shape == (3, 16, 16, 3)


def test_forward_rejects_shape_mismatch():
    cfg = tiny_config()
    model = tiny_model()
    noisy, ctx, rel, cum = random_inputs(cfg)
    c = model.conditioning(np.array([1, 2]), rel, cum, [0, 1])
    with pytest.raises(UsageError):
        model.forward(noisy[:, :8], ctx, c)
    with pytest.raises(UsageError):
        model.forward(noisy, ctx[:, :1], c)


def test_context_order_matters_once_gates_open():
    # temporal embeddings separate context slots, but only reach the
    # output after training perturbs the zero-initialized gates
    cfg = tiny_config()
    model = tiny_model(seed=5)
    noisy, ctx, rel, cum = random_inputs(cfg)
    c = model.conditioning(np.array([40, 70]), rel, cum, [0, 1])
    flipped = ctx[:, ::-1].copy()
    before = model.forward(noisy, ctx, c)
    before_flip = model.forward(noisy, flipped, c)
    assert np.array_equal(before.data, before_flip.data)

    opt = AdamW(model.named_parameters(), lr=1e-2)
    rng = np.random.default_rng(6)
    for _ in range(30):
        opt.zero_grad()
        cc = model.conditioning(np.array([40, 70]), rel, cum, [0, 1])
        loss = mse_loss(model.forward(noisy, ctx, cc),
                        Tensor(rng.standard_normal(noisy.shape).astype(np.float32)))
        loss.backward()
        opt.step()
    with no_grad():
        cc = model.conditioning(np.array([40, 70]), rel, cum, [0, 1])
        after = model.forward(noisy, ctx, cc)
        after_flip = model.forward(noisy, flipped, cc)
    assert np.abs(after.data - after_flip.data).max() > 0


def test_gradient_reaches_only_sampled_view_row_after_one_step():
    cfg = tiny_config()
    model = tiny_model(seed=7)
    params = model.named_parameters()
    opt = AdamW(params, lr=1e-4)
    noisy, ctx, rel, cum = random_inputs(cfg, b=1)
    eps = Tensor(np.random.default_rng(8).standard_normal(noisy.shape)
                 .astype(np.float32))

    def step():
        opt.zero_grad()
        c = model.conditioning(np.array([42]), rel[:1], cum[:1], [1])
        mse_loss(model.forward(noisy, ctx, c), eps).backward()

    step()
    opt.step()
    step()
    g = params["cond.view_table.weight"].grad
    assert g is not None
    assert np.abs(g[1]).sum() > 0
    assert np.abs(g[0]).sum() == 0


def test_fixed_pair_gradient_descent_decreases_monotonically():
    cfg = tiny_config()
    model = tiny_model(seed=11)
    params = model.named_parameters()
    rng = np.random.default_rng(12)
    sch = NoiseSchedule(cfg.t_diff)
    x0 = rng.uniform(-1, 1, (1, 16, 16, 3)).astype(np.float32)
    ctx = rng.uniform(-1, 1, (1, 2, 16, 16, 3)).astype(np.float32)
    eps = rng.standard_normal(x0.shape).astype(np.float32)
    xt = sch.q_sample(x0, 70, eps)
    target = Tensor(eps)

    losses = []
    for _ in range(50):
        model.zero_grad()
        c = model.conditioning(np.array([70]), np.array([0.8], np.float32),
                               np.array([[0.2, 0.1, -0.4]], np.float32), [0])
        loss = mse_loss(model.forward(xt, ctx, c), target)
        loss.backward()
        losses.append(float(loss.data))
        with no_grad():
            for p in params.values():
                if p.grad is not None:
                    p.data -= 0.005 * p.grad
    diffs = np.diff(losses)
    assert (diffs <= 1e-6).all(), losses


# -- sampler ------------------------------------------------------------------

def test_ddim_timestep_grid():
    ts = ddim_timesteps(100, 20)
    assert len(ts) == 20
    assert ts[0] == 99 and ts[-1] == 0
    assert (np.diff(ts) < 0).all()
    assert np.array_equal(ddim_timesteps(100, 1), [99])


def test_ddim_same_seed_is_bit_identical():
    cfg = tiny_config()
    model = tiny_model()
    rng = np.random.default_rng(13)
    ctx = rng.integers(0, 256, (2, 2, 16, 16, 3)).astype(np.uint8)
    rel = np.array([0.4, -0.6], np.float32)
    cum = rng.uniform(-1, 1, (2, 3)).astype(np.float32)
    sch = NoiseSchedule(cfg.t_diff)
    a = ddim_sample(model, sch, ctx, rel, cum, [0, 1],
                    np.random.default_rng(99), steps=10)
    b = ddim_sample(model, sch, ctx, rel, cum, [0, 1],
                    np.random.default_rng(99), steps=10)
    assert a.dtype == np.uint8 and a.shape == (2, 16, 16, 3)
    assert np.array_equal(a, b)


def test_ddim_view_conditioning_reaches_frames():
    # gates must be open for conditioning to matter, so init them randomly
    cfg = tiny_config()
    model = Denoiser(cfg, np.random.default_rng(21), zero_gates=False)
    sch = NoiseSchedule(cfg.t_diff)
    ctx = np.random.default_rng(22).integers(0, 256, (1, 2, 16, 16, 3)) \
        .astype(np.uint8)
    rel = np.array([1.0], np.float32)
    cum = np.zeros((1, 3), np.float32)
    a = ddim_sample(model, sch, ctx, rel, cum, [0],
                    np.random.default_rng(5), steps=8)
    b = ddim_sample(model, sch, ctx, rel, cum, [1],
                    np.random.default_rng(5), steps=8)
    assert not np.array_equal(a, b)


# -- training loss ------------------------------------------------------------

def test_untrained_loss_near_unit_noise_variance():
    cfg = tiny_config()
    model = tiny_model(seed=14)
    sch = NoiseSchedule(cfg.t_diff)
    rng = np.random.default_rng(15)
    total, batches = 0.0, 4
    for i in range(batches):
        b = 64
        batch = {
            "context": rng.integers(0, 256, (b, 2, 16, 16, 3)).astype(np.uint8),
            "target": rng.integers(0, 256, (b, 16, 16, 3)).astype(np.uint8),
            "rel_time": rng.uniform(-2, 2, b).astype(np.float32),
            "cum": rng.uniform(-1, 1, (b, 3)).astype(np.float32),
            "view_rows": rng.integers(0, 2, b),
        }
        with no_grad():
            total += float(training_loss(model, sch, batch, rng).data)
    mean = total / batches
    assert 0.9 < mean < 1.1, mean


def test_training_loss_is_nonnegative_and_scalar():
    cfg = tiny_config()
    model = tiny_model()
    sch = NoiseSchedule(cfg.t_diff)
    rng = np.random.default_rng(16)
    batch = {
        "context": rng.integers(0, 256, (2, 2, 16, 16, 3)).astype(np.uint8),
        "target": rng.integers(0, 256, (2, 16, 16, 3)).astype(np.uint8),
        "rel_time": np.zeros(2, np.float32),
        "cum": np.zeros((2, 3), np.float32),
        "view_rows": np.array([0, 1]),
    }
    loss = training_loss(model, sch, batch, rng)
    assert loss.data.size == 1
    assert float(loss.data) >= 0


def test_collate_stacks_and_maps_views():
    from xvwm.data import EpisodeConfig, generate_episode, make_sample
    from xvwm.worldsim import RenderConfig
    ec = EpisodeConfig(length=10, render=RenderConfig(size=16))
    ep = generate_episode(world_seed=3, episode_id=0, config=ec)
    cfg = tiny_config()
    samples = [make_sample(ep, 4, 2, ViewId.EGO, ViewId.BEV, n_ctx=2),
               make_sample(ep, 5, -1, ViewId.BEV, ViewId.EGO, n_ctx=2)]
    batch = collate(samples, cfg)
    assert batch["context"].shape == (2, 2, 16, 16, 3)
    assert batch["target"].shape == (2, 16, 16, 3)
    assert batch["view_rows"].tolist() == [1, 0]
    assert batch["rel_time"].dtype == np.float32
    assert len(batch["descriptor"]) == 2


# -- checkpoints --------------------------------------------------------------

def ckpt_fixture(tmp_path, seed=0):
    model = tiny_model(seed=seed)
    opt = AdamW(model.named_parameters(), lr=1e-4)
    tensors = model_tensors(model)
    tensors.update({f"opt.{k}": v for k, v in opt.state_arrays().items()})
    rng = np.random.default_rng(77)
    extra = {"rng": rng.bit_generator.state,
             "exposure": {"ego:bev": 12, "bev:bev": 3}, "opt_t": opt.t}
    return Checkpoint(config=tiny_config().to_json_dict(), step=17,
                      tensors=tensors, extra=extra)


def test_checkpoint_save_load_save_is_byte_identical(tmp_path):
    ck = ckpt_fixture(tmp_path)
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(p1, ck)
    loaded = load_checkpoint(p1)
    save_checkpoint(p2, loaded)
    assert p1.read_bytes() == p2.read_bytes()
    assert loaded.step == 17
    assert loaded.extra["exposure"]["ego:bev"] == 12
    for k, v in ck.tensors.items():
        assert np.array_equal(loaded.tensors[k], v)


def test_checkpoint_restores_model_parameters(tmp_path):
    ck = ckpt_fixture(tmp_path, seed=3)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, ck)
    other = tiny_model(seed=4)
    loaded = load_checkpoint(path, expect_config=tiny_config().to_json_dict())
    load_model_tensors(other, loaded.tensors)
    src = tiny_model(seed=3)
    for name, p in src.named_parameters().items():
        assert np.array_equal(other.named_parameters()[name].data, p.data)


def test_checkpoint_config_mismatch_names_fields(tmp_path):
    ck = ckpt_fixture(tmp_path)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, ck)
    wrong = tiny_config().to_json_dict()
    wrong["patch"] = 8
    wrong["dim"] = 64
    with pytest.raises(ConfigurationError) as err:
        load_checkpoint(path, expect_config=wrong)
    msg = str(err.value)
    assert "patch" in msg and "dim" in msg


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT" + b"\x00" * 32)
    with pytest.raises(FormatError):
        load_checkpoint(path)
    ck = ckpt_fixture(tmp_path)
    good = tmp_path / "good.ckpt"
    save_checkpoint(good, ck)
    blob = good.read_bytes()
    trunc = tmp_path / "trunc.ckpt"
    trunc.write_bytes(blob[:len(blob) - 10])
    with pytest.raises(FormatError):
        load_checkpoint(trunc)


def test_checkpoint_missing_tensor_rejected(tmp_path):
    ck = ckpt_fixture(tmp_path)
    del ck.tensors["param.head.bias"]
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, ck)
    model = tiny_model()
    with pytest.raises(FormatError):
        load_model_tensors(model, load_checkpoint(path).tensors)


GOLDEN_CKPT = "tests/golden/model_v1.ckpt"


def test_golden_checkpoint_regenerates_byte_identical():
    """The committed golden checkpoint is a pure function of a fixed seed."""
    import pathlib
    cfg = ModelConfig(image_size=8, patch=4, dim=8, layers=1, heads=2,
                      context_len=1, freq_dim=8)
    model = Denoiser(cfg, np.random.default_rng(2024))
    ck = Checkpoint(config=cfg.to_json_dict(), step=0,
                    tensors=model_tensors(model),
                    extra={"note": "golden fixture"})
    root = pathlib.Path(__file__).resolve().parent.parent
    golden = root / GOLDEN_CKPT
    import tempfile
    with tempfile.NamedTemporaryFile(suffix=".ckpt") as tmp:
        save_checkpoint(tmp.name, ck)
        fresh = pathlib.Path(tmp.name).read_bytes()
    assert golden.exists(), "golden checkpoint missing from repo"
    assert fresh == golden.read_bytes()


def test_golden_checkpoint_parses():
    import pathlib
    root = pathlib.Path(__file__).resolve().parent.parent
    ck = load_checkpoint(root / GOLDEN_CKPT)
    assert ck.step == 0
    assert ck.config["dim"] == 8
    cfg = ModelConfig.from_json_dict(ck.config)
    model = Denoiser(cfg, np.random.default_rng(0))
    load_model_tensors(model, ck.tensors)


# -- scale round trip ---------------------------------------------------------

def test_u8_scale_round_trip():
    img = np.arange(256, dtype=np.uint8).reshape(16, 16, 1).repeat(3, axis=2)
    assert np.array_equal(to_u8(to_model_scale(img)), img)
