"""Operational meaning of the coupling distance.

A referee samples a label from the optimal coupling, hands the player one
of the two coupled states with even odds, and the player guesses which.
The best win rate is (1 + D) / 2 where D is the coupling distance, so the
Monte Carlo estimate converges onto the LP value.
"""

from ensemble_metrics import kantorovich_distance
from ensemble_metrics.oracle import random_ensemble, simulate_kantorovich_game


def main() -> None:
    a = random_ensemble(2, size=3, seed=21)
    b = random_ensemble(2, size=2, seed=22)
    d, coupling = kantorovich_distance(a, b)
    print(f"coupling distance (LP): {d:.6f}")
    print(f"predicted win rate:     {(1 + d) / 2:.6f}\n")

    for trials in (100, 1000, 10000, 100000):
        res = simulate_kantorovich_game(a, b, coupling, trials=trials, seed=7)
        implied = 2 * res.estimate - 1
        print(
            f"  {trials:>6} trials: win rate {res.estimate:.4f} "
            f"+- {res.stderr:.4f}  ->  distance {implied:+.4f}"
        )


if __name__ == "__main__":
    main()
