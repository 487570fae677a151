"""Pit error-guided selection against random and fixed-lattice baselines.

All three policies run the identical loop: same corpus, same initial views,
same per-iteration update subsets. Only the choice of new viewpoints differs.
The final mean IoU deltas summarize who reconstructed better at this scale.
"""

from voxsel.harness import LoopConfig, compare_policies, make_corpus


def main():
    corpus = make_corpus(8, dim=32, seed=2, kinds=("ell", "cross"))
    config = LoopConfig(dim=32, iterations=3, update_fraction=1.0, seed=2)
    print("comparing policies on 8 asymmetric shapes, 3 iterations x 3 views...")

    result = compare_policies(corpus, config)
    print(f"\n{'policy':>14} {'mean IoU per iteration'}")
    for policy, stats in result["policies"].items():
        traj = " -> ".join(f"{v:.4f}" for v in stats["mean_iou"])
        print(f"{policy:>14} {traj}")

    deltas = result["deltas"]
    print(f"\nerror-guided minus random:        {deltas['error_guided_minus_random']:+.4f}")
    print(f"error-guided minus fixed-lattice: {deltas['error_guided_minus_fixed_lattice']:+.4f}")

    print("\nwhy random tends to win here: a binary error grid gives every view")
    print("exactly its antipode's score, so error-guided burns picks on antipodal")
    print("pairs (one effective silhouette each) while random's spread of ray")
    print("directions carves faster. the guided policy still beats the fixed")
    print("lattice walk, which revisits one pitch row before moving on.")


if __name__ == "__main__":
    main()
