"""Tour of destruction channels and their block structure.

Every idempotent channel with a full-rank fixed state is a direct sum of
"replace the A factor by tau_i, keep the B factor" maps in a suitable
basis.  This script builds the standard examples, shows how they act, and
verifies the structural identities numerically.
"""

import numpy as np

from instability import (
    cond_depolarizer,
    dephaser,
    maximally_entangled_state,
    plus_state,
    replacer,
    tensor_channels,
)

np.set_printoptions(precision=4, suppress=True, linewidth=120)

print("A dephaser keeps populations and kills coherences:")
deph = dephaser(2)
plus = plus_state(2)
print("input |+><+| =\n", plus.real)
print("output =\n", deph.apply(plus).real)

print("\nA replacer models thermalization toward a Gibbs state:")
gibbs = np.diag([1 / 3, 2 / 3]).astype(complex)
therm = replacer(gibbs)
print("any input ->\n", therm.apply(plus).real)

print("\nConditionally depolarizing one half of a maximally entangled pair:")
cd = cond_depolarizer(2, 2)
phi = maximally_entangled_state(2)
print("output =\n", cd.apply(phi).real)

print("\nIdempotence and duality hold by construction:")
rng = np.random.default_rng(0)
x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
x = (x + x.conj().T) / 2
print("||Delta(Delta(X)) - Delta(X)|| =", np.abs(deph.apply(deph.apply(x)) - deph.apply(x)).max())
print("Delta^*(I) =\n", therm.apply_dual(np.eye(2)).real)

print("\nThe twist by Delta(I)^{1/2} relates the channel, its dual, and the")
print("trace-preserving conditional expectation onto the same algebra:")
e01 = np.zeros((2, 2), dtype=complex)
e01[0, 1] = 1.0
lhs = therm.twist(therm.apply_tp_expectation(e01), 1.0)
print("||T(tpce(E)) - Delta(E)|| =", np.abs(lhs - therm.apply(e01)).max())

print("\nComposite systems multiply blockwise (locality of destruction):")
joint = tensor_channels(deph, therm)
a = plus_state(2)
b = np.diag([0.9, 0.1]).astype(complex)
lhs = joint.apply(np.kron(a, b))
rhs = np.kron(deph.apply(a), therm.apply(b))
print("||Delta_AB(a x b) - Delta(a) x Delta(b)|| =", np.abs(lhs - rhs).max())
print("composite blocks:", [(blk.d_a, blk.d_b) for blk in joint.blocks])
