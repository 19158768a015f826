import numpy as np
import pytest

from stpp.oracles import (
    GradientStream,
    LogisticProblem,
    QuadraticProblem,
    gen_logistic,
    gen_quadratic,
    load_snapshot,
    save_snapshot,
)


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@pytest.fixture(scope="module")
def logistic():
    return gen_logistic(n=4, p=6, J=30, reg=0.05, sigma_h=0.3, seed=3)


def test_logistic_full_size_shapes():
    prob = gen_logistic(n=20, p=400, J=500, reg=0.01, sigma_h=0.2, seed=0)
    assert prob.features.shape == (20, 500, 400)
    assert set(np.unique(prob.labels)) <= {-1, 1}


def test_logistic_homogeneous_and_deterministic():
    a = gen_logistic(n=3, p=4, J=10, sigma_h=0.0, seed=7)
    assert np.allclose(a.models, a.models[0])
    b = gen_logistic(n=3, p=4, J=10, sigma_h=0.0, seed=7)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)


def test_label_rule_follows_sigmoid():
    # large-margin model: labels should mostly agree with sign(h^T model)
    prob = gen_logistic(n=1, p=3, J=4000, sigma_h=0.0, seed=1)
    m = np.einsum("jp,p->j", prob.features[0], prob.models[0])
    frac = np.mean(np.sign(m) == prob.labels[0])
    expected = np.mean(1 / (1 + np.exp(-np.abs(m))))
    assert abs(frac - expected) < 0.03


def test_regularizer_only_gradient_zero_at_origin():
    prob = LogisticProblem(features=np.zeros((1, 1, 3)), labels=np.ones((1, 1), dtype=np.int8), reg=0.3)
    g = prob.local_gradient(0, np.zeros(3))
    # data term at zero features is 0; the regularizer is odd
    assert np.array_equal(g, np.zeros(3))


def test_single_sample_gradient():
    prob = LogisticProblem(features=np.array([[[1.0, 0.0]]]), labels=np.ones((1, 1), dtype=np.int8), reg=0.0)
    assert np.allclose(prob.local_gradient(0, np.zeros(2)), [-0.5, 0.0], atol=1e-15)


def test_logistic_gradient_finite_difference(logistic, rng):
    for _ in range(100):
        x = rng.standard_normal(logistic.p)
        i = int(rng.integers(logistic.n))
        num = central_diff(lambda z: logistic.local_value(i, z), x)
        ana = logistic.local_gradient(i, x)
        assert np.linalg.norm(ana - num) <= 1e-5 * max(np.linalg.norm(ana), 1e-3)


def test_full_gradient_rows_and_average(logistic, rng):
    X = rng.standard_normal((logistic.n, logistic.p))
    full = logistic.full_gradient(X)
    for i in range(logistic.n):
        assert np.allclose(full[i], logistic.local_gradient(i, X[i]), rtol=1e-12, atol=1e-14)
    x = rng.standard_normal(logistic.p)
    num = central_diff(logistic.value, x)
    assert np.allclose(logistic.gradient(x), num, rtol=1e-5, atol=1e-8)


def test_full_batch_equals_local(logistic, rng):
    full = LogisticProblem(features=logistic.features, labels=logistic.labels, reg=logistic.reg,
                           batch=logistic.J)
    x = rng.standard_normal(full.p)
    assert np.array_equal(full.stochastic_gradient(1, x, rng), full.local_gradient(1, x))


def test_stochastic_unbiased_logistic(logistic, rng):
    x = rng.standard_normal(logistic.p)
    stream = GradientStream(11)
    for i in range(logistic.n):
        draws = np.stack([logistic.draw(i, x, stream, t).value for t in range(10_000)])
        mean, std = draws.mean(0), draws.std(0)
        assert np.all(np.abs(mean - logistic.local_gradient(i, x)) < 4 * std / 100 + 1e-12)


def test_quadratic_examples():
    q = QuadraticProblem(a=np.ones((1, 3)), b=np.zeros((1, 3)))
    assert np.array_equal(q.x_star, np.zeros(3))
    q2 = QuadraticProblem(a=np.ones((2, 3)), b=np.array([[0.0] * 3, [2.0] * 3]))
    assert np.allclose(q2.x_star, np.ones(3))
    q3 = gen_quadratic(n=6, p=5, mu=0.1, L=2.0, heterogeneity=1.5, seed=4)
    assert np.linalg.norm(q3.gradient(q3.x_star)) <= 1e-10
    assert q3.mu == 0.1 and q3.L == 2.0
    avg = q3.a.mean(0)
    assert avg.min() == pytest.approx(0.1) and avg.max() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        gen_quadratic(n=2, p=2, mu=3.0, L=1.0)


def test_quadratic_stationarity_and_fd(rng):
    q = gen_quadratic(n=4, p=3, mu=0.5, L=3.0, seed=2)
    X = np.tile(q.x_star, (4, 1))
    assert np.allclose(q.full_gradient(X).mean(0), 0, atol=1e-12)
    for _ in range(100):
        x = rng.standard_normal(3)
        num = central_diff(q.value, x)
        assert np.linalg.norm(q.gradient(x) - num) <= 1e-5 * max(np.linalg.norm(num), 1e-3)


def test_quadratic_noiseless_deterministic(rng):
    q = gen_quadratic(n=2, p=3, mu=1.0, L=2.0, sigma=0.0, seed=0)
    x = rng.standard_normal(3)
    assert np.array_equal(q.stochastic_gradient(0, x, rng), q.local_gradient(0, x))


def test_quadratic_unbiased_and_variance():
    q = gen_quadratic(n=3, p=4, mu=1.0, L=2.0, sigma=0.7, seed=5)
    x = np.ones(4)
    stream = GradientStream(3)
    draws = np.stack([q.sample_gradients(np.tile(x, (3, 1)), stream, t) for t in range(10_000)])
    noise = draws - q.full_gradient(np.tile(x, (3, 1)))
    std = noise.std(0)
    assert np.all(np.abs(noise.mean(0)) < 4 * std / 100)
    per_agent = (noise**2).sum(-1).mean(0)
    assert np.allclose(per_agent, 0.49, rtol=0.05)
    sigma_hat = per_agent.max()
    # sum of noise over any agent subset has variance at most |I| sigma^2
    for subset in ([0], [1, 2], [0, 1, 2]):
        agg = noise[:, subset, :].sum(1)
        assert (agg**2).sum(-1).mean() <= len(subset) * sigma_hat * 1.1


def test_stream_keying_order_independent():
    q = gen_quadratic(n=3, p=4, mu=1.0, L=2.0, sigma=1.0, seed=0)
    x = np.zeros(4)
    s1, s2 = GradientStream(9), GradientStream(9)
    forward = [q.draw(i, x, s1, t).value for t in range(3) for i in range(3)]
    backward = [q.draw(i, x, s2, t).value for t in reversed(range(3)) for i in reversed(range(3))]
    assert all(np.array_equal(a, b) for a, b in zip(forward, reversed(backward)))
    other_rep = q.draw(0, x, GradientStream(9, rep=1), 0).value
    assert not np.array_equal(other_rep, forward[0])


def test_snapshot_round_trip(tmp_path, logistic):
    path = save_snapshot(logistic, tmp_path / "data")
    back = load_snapshot(path)
    assert np.array_equal(back.features, logistic.features) and back.reg == logistic.reg
    q = gen_quadratic(n=2, p=3, mu=0.5, L=1.0, sigma=0.2, seed=1)
    back_q = load_snapshot(save_snapshot(q, tmp_path / "q.npz"))
    assert np.array_equal(back_q.a, q.a) and back_q.sigma == 0.2
