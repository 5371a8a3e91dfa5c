//! Plain descriptions of every check id the runner can emit.

const ENTRIES: &[(&str, &str)] = &[
    ("gset_compatibility", "The pairing of the group with the sector set is additive in both arguments modulo 2Z, checked over all generator triples and sectors."),
    ("affine.lie_algebra", "The bracket of the finite-dimensional Lie algebra is antisymmetric and satisfies the Jacobi identity, and the form is invariant."),
    ("delta.alpha", "z0^-1 ((z1-z2)/z0)^a delta((z1-z2)/z0) = z1^-1 ((z0+z2)/z1)^-a delta((z0+z2)/z1), coefficient by coefficient in a box."),
    ("delta.alpha_power", "The equivalent form with (z1-z2)^a in front: z0^-1 delta((z1-z2)/z0) times (z1-z2)^a equals z1^-1 z0^a ((z0+z2)/z1)^-a delta((z0+z2)/z1)."),
    ("delta.three_term_special", "The plain three-term delta identity, without prefactors or polynomial."),
    ("delta.substitution", "f(z) delta(z) = f(1) delta(z) for a Laurent polynomial f."),
    ("delta.three_term", "The three-term delta identity multiplied by z1^r z2^s (z1-z2)^k p(z1,z2) for a fixed polynomial p and several integers r, s, k."),
    ("delta.derivative_transfer", "A derivative in z1 of the twisted delta kernel equals the matching derivative in z0."),
    ("binom.additivity", "Binomial expansions of (z1-z2)^a and (z1-z2)^b multiply to the expansion of (z1-z2)^(a+b)."),
    ("residue.derivative", "The z0-residue of a z0-derivative vanishes on a delta kernel."),
    ("delta.vanishing", "(z1-z2)^m times the n-th z2-derivative of z2^-1 delta(z1/z2) vanishes exactly when m > n."),
    ("fock.heisenberg", "Heisenberg modes on the Fock space satisfy [h(m), h(n)] = m <h,h> level delta(m+n,0)."),
    ("affine.relations", "Modes of the affine algebra on the truncated Verma module satisfy [a(m), b(n)] = [a,b](m+n) + m <a,b> level delta(m+n,0), as exact matrices."),
    ("omega.extraction", "Every basis vector of the vacuum space is annihilated by the positive Heisenberg modes and the basis is independent."),
    ("z.relation", "Generalized commutation relations of the Z-operators for root vectors, including the nonintegral binomial exponents, coefficient by coefficient."),
    ("z.h_commutation", "Z-operators commute with the positive and negative Heisenberg modes."),
    ("psi.relation", "Generalized commutation relations of the parafermion fields on the vacuum space, on every source vector and window point."),
    ("psi.double_zero", "(z1-z2)^2 times the generalized bracket of two parafermion fields vanishes."),
    ("psi.preserves_omega", "Parafermion modes map the vacuum space into itself and shift the h(0)-weight by the root."),
    ("lower_truncation", "For each source vector the field modes vanish past the truncation bound."),
    ("eu.relations", "The affine action reconstructed on E(U) from the vacuum space reproduces the affine relations."),
    ("eu.dimensions", "The reconstructed module has the same graded dimensions as the Verma module."),
    ("commutativity", "Generalized weak commutativity (z1-z2)^(k+(g,h)) a(z1)b(z2) = (-1)^k c(g,h) (z2-z1)^(k+(g,h)) b(z2)a(z1), with the least passing k."),
    ("product.vanishing", "The n-th product vanishes off the coset (g,h)+Z and does not change when computed with a larger exponent."),
    ("product.vacuum", "Products with the identity field: I_n a = delta(n,-1) a, and a_(-r-1) I equals the r-th divided derivative of a."),
    ("product.derivative", "The derivative of a product distributes over both factors, and (D a)_n b = -n a_(n-1) b."),
    ("jacobi", "The generalized Jacobi relation for two fields, tested on a vector at every coefficient of z0^A z1^B z^C in the window."),
    ("weak_associativity", "Generalized weak associativity on a vector, the special case of the Jacobi relation where the second term drops out."),
    ("skew_symmetry", "Skew symmetry of the products: b_n a is recovered from derivatives of a_(n+r) b with the phase c(g,h)e^(pi i (g,h))."),
    ("adjoint_commutativity", "The adjoint action of one field commutes with the products of two others after multiplication by the appropriate power of (z1-z2)."),
    ("d_bracket", "The derivation D satisfies [D, a_n] = -n a_(n-1) on every generator and closure element."),
    ("closure.fixed_point", "Iterated products of the generators stop producing new independent fields inside the weight and sector window."),
    ("axioms.vacuum", "The candidate algebra has a vacuum state with Y(1,z) = 1 and a state map a_(-1) 1 that recovers each element."),
    ("axioms.coset_support", "Every nonzero product table entry sits on the coset (g,h)+Z."),
    ("axioms.jacobi", "The full generalized Jacobi identity for a triple of algebra elements, evaluated through the product table."),
    ("axioms.associativity_equivalence", "Weak associativity for a triple agrees with the Jacobi relation at the corresponding exponents."),
    ("axioms.module_transfer", "Products in the table act on states as the fields act on the module."),
    ("axioms.sampling", "Seeded triples for the Jacobi check are redrawn when no coefficient of theirs lies inside the truncation; the report lists the redrawn ones."),
    ("axioms.derivation", "The product with the vacuum at -2 acts as the derivation on every element."),
    ("representatives.replay", "Rebuilding the closure with the lifts of (g,h) shifted by 2 gives identical coefficient dumps."),
    ("fault", "Negative check: a deliberately corrupted coefficient must make the named check fail; the report records where."),
];

/// Description for a check id or family; arguments in `[...]` are ignored.
pub fn explain(id: &str) -> Option<&'static str> {
    let base = id.split('[').next().unwrap_or(id);
    let base = base.strip_suffix(".fault").unwrap_or(base);
    ENTRIES
        .iter()
        .find(|(k, _)| *k == base)
        .or_else(|| ENTRIES.iter().find(|(k, _)| base.starts_with(&format!("{k}."))))
        .map(|(_, d)| *d)
}

pub fn known_ids() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(k, _)| *k)
}
