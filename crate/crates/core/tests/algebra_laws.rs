use keller_core::{rat, PSeries, Poly, PolyMap, PolyMatrix, Rat};
use proptest::prelude::*;

fn poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..3, n), -5i64..=5), 0..5).prop_map(move |terms| {
        terms.into_iter().fold(Poly::zero(n), |acc, (e, c)| &acc + &Poly::monomial(n, e, rat(c)))
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec((-6i64..=6, 1i64..=4), n).prop_map(|v| v.into_iter().map(|(a, b)| Rat::new(a.into(), b.into())).collect())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn sign(p: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1 } else { -1 }
}

fn eval_matrix(m: &PolyMatrix, at: &[Rat]) -> Vec<Vec<Rat>> {
    m.rows().iter().map(|row| row.iter().map(|p| p.eval_rat(at).unwrap()).collect()).collect()
}

fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_rule(p in poly(3), q in poly(3), i in 0usize..3) {
        let lhs = (&p * &q).partial(i).unwrap();
        let rhs = &(&p.partial(i).unwrap() * &q) + &(&p * &q.partial(i).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn chain_rule(f in prop::collection::vec(poly(2), 2), g in prop::collection::vec(poly(2), 2), at in point(2)) {
        let f = PolyMap::new(f).unwrap();
        let g = PolyMap::new(g).unwrap();
        let fg = f.compose(&g).unwrap();
        let gx: Vec<Rat> = g.components().iter().map(|p| p.eval_rat(&at).unwrap()).collect();
        let expected = mat_mul(&eval_matrix(&f.jacobian(), &gx), &eval_matrix(&g.jacobian(), &at));
        prop_assert_eq!(eval_matrix(&fg.jacobian(), &at), expected);
    }

    #[test]
    fn det_matches_permutation_expansion(entries in prop::collection::vec(poly(2), 9), at in point(2)) {
        let rows: Vec<Vec<Poly>> = entries.chunks(3).map(|c| c.to_vec()).collect();
        let m = PolyMatrix::from_rows(rows);
        let v = eval_matrix(&m, &at);
        let mut expected = rat(0);
        for p in permutations(3) {
            let term = (0..3).fold(rat(sign(&p)), |acc, i| acc * &v[i][p[i]]);
            expected += term;
        }
        prop_assert_eq!(m.det().unwrap().eval_rat(&at).unwrap(), expected);
    }

    #[test]
    fn jacobian_of_composition_is_product_of_determinants(f in prop::collection::vec(poly(2), 2), at in point(2)) {
        let f = PolyMap::new(f).unwrap();
        let g = keller_core::registry::g0();
        let fg = f.compose(&g).unwrap();
        let gx: Vec<Rat> = g.components().iter().map(|p| p.eval_rat(&at).unwrap()).collect();
        let lhs = fg.jacobian_det().unwrap().eval_rat(&at).unwrap();
        prop_assert_eq!(lhs, f.jacobian_det().unwrap().eval_rat(&gx).unwrap());
    }

    #[test]
    fn reversion_undoes_composition(c in prop::collection::vec((-4i64..=4, 1i64..=3), 1..6), lead in prop::sample::select(vec![-2i64, -1, 1, 3])) {
        let order = 8;
        let coeffs = std::iter::once((1, rat(lead)))
            .chain(c.iter().enumerate().map(|(k, &(a, b))| (k as i64 + 2, Rat::new(a.into(), b.into()))));
        let a = PSeries::from_rats(0, coeffs, None);
        let b = a.revert(order).unwrap();
        let ab = PSeries::compose(&a, &b).unwrap().truncate(order);
        let ba = PSeries::compose(&b, &a).unwrap().truncate(order);
        let id = PSeries::var(0).truncate(order);
        prop_assert_eq!(ab, id.clone());
        prop_assert_eq!(ba, id);
    }
}

#[test]
fn keller_maps() {
    assert!(keller_core::registry::g0().is_keller().unwrap());
    assert!(keller_core::registry::n3_triangular().is_keller().unwrap());
    assert!(!keller_core::registry::f0().is_keller().unwrap());
    let j = keller_core::registry::f1().jacobian_det().unwrap();
    let (z1, z2) = (Poly::var(2, 0).unwrap(), Poly::var(2, 1).unwrap());
    let w = &z2 + &z1.pow(2);
    assert_eq!(j, w.pow(2).scale(&rat(-2)));
}
