"""Regenerate the shipped domain files under src/active_explicable/data/.

Problem instances are drawn with fixed seeds, so rerunning this script
reproduces the committed JSON byte for byte.
"""

from active_explicable.domainfile import dump_domain
from active_explicable.domains import blocksworld, taxi
from active_explicable.experiments import BUILTIN_DOMAINS


def main():
    space, problems = blocksworld.build_blocksworld(4, n_problems=10, seed=blocksworld.CONVERGENCE_SEED)
    dump_domain(space, problems, BUILTIN_DOMAINS["blocksworld"], "blocksworld-4")
    space, problems = blocksworld.build_blocksworld(
        4, n_problems=4, seed=blocksworld.COMPARISON_SEED, min_cost=4, first_cost=4
    )
    dump_domain(space, problems, BUILTIN_DOMAINS["blocksworld-comparison"], "blocksworld-4-comparison")
    space, problems = taxi.build_taxi()
    dump_domain(space, problems, BUILTIN_DOMAINS["taxi"], "taxi")
    for name, path in BUILTIN_DOMAINS.items():
        print(f"wrote {name}: {path}")


if __name__ == "__main__":
    main()
