"""
Activation Patterns: a guided tour
==================================

Loads the committed 2-3-2 analog-XOR classifier, runs inputs through it,
and shows the core vocabulary of this library:

- the activation signature of an input (which hidden ReLUs fire),
- activation patterns (A, D) as partial constraints on those states,
- the specificity order between patterns, and the `follows` relation.

Run: python demos/01_activation_patterns_tour.py
"""

from pathlib import Path

import numpy as np

from napverify import Nap, extract, follows, load_network, subsumes

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    net = load_network(FIXTURES / "xnet.json")
    print("=" * 64)
    print(f"Network {net.name!r}: {net.input_dim} inputs -> "
          f"{net.hidden_layer_sizes} hidden -> {net.output_dim} outputs")
    print("=" * 64)

    # ----- forward passes and signatures --------------------------------
    points = [(0.06, 0.06), (0.1, 0.9), (0.9, 0.1), (0.25, 0.25)]
    print("\nInputs, outputs, and hidden activation states (+ fires, - doesn't):")
    for p in points:
        x = np.array(p)
        y, sig = net.forward_with_signature(x)
        states = "".join("+" if s else "-" for s in sig.states)
        print(f"  x={p}  y=({y[0]: .4f}, {y[1]: .4f})  "
              f"label={net.predict(x)}  states=({states})")

    print("\nNote the quirk: (0.9, 0.1) lands on label 0. The weights are kept")
    print("exactly as published with the original experiment, quirks included.")

    # ----- patterns and the specificity order ---------------------------
    print("\n" + "-" * 64)
    print("Extracted patterns are total: every hidden neuron is constrained.")
    p_center = extract(net, [0.06, 0.06])
    print(f"  extract(0.06, 0.06) = activated {sorted(p_center.activated)}, "
          f"deactivated {sorted(p_center.deactivated)}")

    weaker = Nap(frozenset({1}), frozenset())  # only requires neuron 1 to fire
    print(f"  a weaker pattern: activated {sorted(weaker.activated)}, deactivated []")
    print(f"  extract(...) precedes weaker pattern: {subsumes(p_center, weaker)}")
    print(f"  weaker precedes extract(...):          {subsumes(weaker, p_center)}")

    # ----- follows -------------------------------------------------------
    print("\nAn input follows any pattern its own extraction precedes:")
    for p in points:
        print(f"  follows({p}, weaker) = {follows(net, list(p), weaker)}")
    trivial = Nap(frozenset(), frozenset())
    print(f"  everything follows the trivial pattern: "
          f"{all(follows(net, list(p), trivial) for p in points)}")

    # ----- strictness at the boundary ------------------------------------
    print("\nActivation is strict: a pre-activation of exactly 0 is deactivated.")
    x = np.array([0.5, 0.5])
    pres = net.pre_activations(x)
    print(f"  at x=(0.5, 0.5) the third pre-activation is {pres[2]} "
          f"-> state {'activated' if pres[2] > 0 else 'deactivated'}")


if __name__ == "__main__":
    main()
