"""Smoke test for the pdcoea extension module."""

import math

import pdcoea


def check_game():
    g = pdcoea.BilinearParams(10, 0.4, 0.6, 0.1)
    assert (g.n, g.alpha, g.beta, g.epsilon) == (10, 0.4, 0.6, 0.1)
    # y(x - beta n) - alpha n x
    assert g.payoff(7, 3) == 3 * (7 - 6) - 4 * 7
    assert g.payoff_bits([True] * 7 + [False] * 3, [True] * 3 + [False] * 7) == g.payoff(7, 3)
    assert g.dominates(5, 5, 5, 5)

    w = pdcoea.BilinearParams(20, 0.4, 0.6, 0.1).intransitivity_witness()
    assert w is not None and len(w) == 4
    h = pdcoea.BilinearParams(20, 0.4, 0.6, 0.1)
    assert all(h.dominates(*w[i], *w[(i + 1) % 4]) for i in range(4))

    try:
        pdcoea.BilinearParams(10, 1.5, 0.5, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha > 1 accepted")


def check_run():
    g = pdcoea.BilinearParams(30, 0.9, 0.05, 0.1)
    a = pdcoea.run_trial(g, 10, 0.05, seed=4, budget_generations=2000)
    b = pdcoea.run_trial(g, 10, 0.05, seed=4, budget_generations=2000)
    assert a == b
    assert a["T_interactions"] == 10 * a["generations_run"]
    t = pdcoea.run_trial(g, 10, 0.05, seed=4, budget_generations=2000, trajectory=True)
    assert t["hit"] == a["hit"] and len(t["trajectory"]) > 0
    assert {"prey_in_s0", "p0", "current_level"} <= set(t["trajectory"][0])


def check_calculators():
    d = 0.01
    assert math.isclose(pdcoea.mutation_rate_for_delta(d), 0.5 * math.log(42 / (41 * (1 + d))), rel_tol=1e-14)
    chi = pdcoea.mutation_rate_for_delta(d)
    assert math.isclose(pdcoea.delta_for_mutation_rate(chi), d, rel_tol=1e-9)
    assert math.isclose(pdcoea.error_threshold(0.25), 2 * math.log(2), rel_tol=1e-14)
    assert math.isclose(pdcoea.level_runtime_bound(3, 10, 0.5, [0.5, 0.25], c_pp=2.0), 15840.0, rel_tol=1e-14)

    g = pdcoea.BilinearParams(100, 0.9, 0.05, 0.1)
    b = pdcoea.bilinear_runtime_budget(g, 100, chi, r=2.0)
    delta = 42 / 41 * math.exp(-2 * chi) - 1
    want = 2 * 2.0 * 1.000001 * 100 / delta * (100**2 * 100 + 23 * 100 / chi * math.log(1 / (0.05 * (1 - 0.9 + 0.1))))
    assert math.isclose(b["value"], want, rel_tol=1e-12), (b, want)


if __name__ == "__main__":
    check_game()
    check_run()
    check_calculators()
    print(f"pdcoea {pdcoea.__version__}: smoke test passed")
