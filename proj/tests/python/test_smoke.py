"""End-to-end checks of the python surface against known-good values."""

import json
import math

import pytest

import maskrl


def lms_config(**overrides):
    cfg = {
        "environment": "lms",
        "mask": "threshold",
        "lms": {"sigma": 0.0, "theta": 1.2},
    }
    cfg.update(overrides)
    return json.dumps(cfg)


def paintshop_config(**overrides):
    cfg = {
        "environment": "paintshop",
        "mask": "all",
        "paintshop": {"lanes": 2, "width": 2, "colors": 2, "sequence_length": 4},
    }
    cfg.update(overrides)
    return json.dumps(cfg)


def inventory_config(**overrides):
    cfg = {
        "environment": "inventory",
        "mask": "int",
        "eval_episodes": 400,
        "inventory": {
            "pipeline": 1,
            "stochastic_lead": False,
            "lambda": 1.0,
            "holding_cost": 1.0,
            "penalty": 30.0,
            "levels": 2,
            "quantum": 10,
            "horizon": 20,
            "base_stock": 8.0,
        },
        "oracle": {"horizon": 20, "demand_cap": 12},
    }
    cfg.update(overrides)
    return json.dumps(cfg)


def test_version():
    assert maskrl.__version__ == "0.1.0"


def test_masked_distribution_worked_example():
    d = maskrl.masked_distribution([1.0, 1.0, 1.0], [True, True, False])
    assert d.probs == [0.5, 0.5, 0.0]
    assert d.allowed == [True, True, False]
    assert not d.fallback_used
    assert d.argmax() == 0
    assert d.log_prob(0) == pytest.approx(math.log(0.5), rel=1e-12)
    assert d.entropy() == pytest.approx(math.log(2.0), rel=1e-12)
    assert d.sample(0.0) == 0
    assert d.sample(0.999) == 1


def test_masked_distribution_empty_row_falls_back():
    d = maskrl.masked_distribution([0.0, 2.0], [False, False])
    assert d.fallback_used
    assert d.allowed == [True, True]
    assert sum(d.probs) == pytest.approx(1.0, rel=1e-12)


def test_masked_distribution_rejects_mismatched_row():
    with pytest.raises(ValueError):
        maskrl.masked_distribution([0.0, 1.0], [True])


def test_config_canonicalization_and_hash():
    cfg = lms_config()
    canonical = maskrl.canonical_config(cfg)
    assert maskrl.canonical_config(canonical) == canonical
    h = maskrl.config_hash(cfg)
    assert len(h) == 16 and int(h, 16) >= 0
    assert maskrl.config_hash(canonical) == h
    assert maskrl.config_hash(lms_config(total_timesteps=123)) != h


def test_config_errors_name_the_offending_path():
    assert issubclass(maskrl.ConfigError, ValueError)
    bad = json.dumps({"environment": "lms", "lms": {"sgima": 1.0}})
    with pytest.raises(maskrl.ConfigError, match="lms.sgima"):
        maskrl.canonical_config(bad)
    with pytest.raises(maskrl.ConfigError):
        maskrl.LoadManagement(paintshop_config())


def test_load_day_is_solved_by_following_the_mask():
    env = maskrl.LoadManagement(lms_config())
    assert env.action_count == 2
    on, off = maskrl.LoadManagement.ACTION_ON, maskrl.LoadManagement.ACTION_OFF
    env.reset(0)
    total, offs, done = 0.0, 0, False
    while not done:
        # the threshold mask admits the off action only at forecast peaks;
        # spending the budget exactly there clears the day
        row = env.mask_row()
        action = off if row[off] else on
        offs += action == off
        _, reward, done, _ = env.step(action)
        total += reward
    assert offs == 3  # the off budget covers exactly the admitted peaks
    assert total == 1.0
    rule = maskrl.evaluate_rule(lms_config(eval_episodes=5))
    assert rule["solved_fraction"] == 1.0


def test_paintshop_episode_and_exhaustive_minimum():
    cfg = paintshop_config()
    instance = maskrl.generate_instance(cfg, seed=1)
    assert len(instance) == 4 and set(instance) <= {1, 2}

    oracle = maskrl.optimal_color_changes(cfg, [1, 1, 2, 2], level="inv")
    assert oracle["optimal_changes"] == 1
    assert oracle["states_visited"] > 0

    env = maskrl.PaintShop(cfg)
    obs = env.reset_with_sequence([1, 1, 2, 2])
    assert len(obs) == env.observation_dim
    steps, done = 0, False
    while not done:
        row = env.mask_row()
        _, _, done, _ = env.step(row.index(True))
        steps += 1
    assert steps == 8  # every car is stored once and retrieved once
    assert sorted(env.outgoing) == [1, 1, 2, 2]
    changes = sum(a != b for a, b in zip(env.outgoing, env.outgoing[1:]))
    assert changes >= oracle["optimal_changes"]


def test_inventory_recursion_matches_simulation():
    cfg = inventory_config()
    exact = maskrl.optimal_inventory_cost(cfg)
    assert exact["cost_per_step"] == pytest.approx(exact["total_cost"] / 20)
    sim = maskrl.base_stock_cost(cfg)
    assert sim["std_error"] > 0
    # the order-up-to level sits on the optimal policy here, so simulation
    # must reproduce the exact expectation up to sampling noise
    slack = 4 * sim["std_error"] + 1e-9
    assert abs(sim["mean_cost_per_step"] - exact["cost_per_step"]) < slack


def test_inventory_env_reports_flow():
    env = maskrl.Inventory(inventory_config())
    assert env.action_count == 2
    obs = env.reset(3)
    assert len(obs) == env.observation_dim == 2
    for _ in range(20):
        row = env.mask_row()
        obs, reward, done, info = env.step(row.index(True))
        assert reward <= 0.0  # rewards are negated costs
        for key in ("demand", "lost_sales", "on_hand"):
            assert key in info
        if done:
            break


def test_short_training_run_returns_a_curve():
    cfg = lms_config(total_timesteps=8192, eval_episodes=5)
    result = maskrl.train(cfg, seed=0)
    assert result.timesteps >= 8192
    assert result.episodes > 0
    assert result.fallback_events == 0
    assert result.config_hash == maskrl.config_hash(cfg)
    assert result.curve and all(math.isfinite(r) for _, r in result.curve)
    assert set(result.eval) == {"solved_fraction", "mean_reward"}

    env = maskrl.LoadManagement(cfg)
    obs = env.reset(0)
    logits = result.logits(obs)
    assert len(logits) == 2 and all(math.isfinite(x) for x in logits)
    assert result.greedy_action(obs, env.mask_row()) in (0, 1)
