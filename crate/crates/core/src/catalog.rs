//! Named cochain representatives and the subgroup/quotient maps they live on.
//!
//! Groups: the built-ins plus the subgroups `K = <f2, f3, f4, f5>` of 32G3f (pc
//! sequence `f2, f3, f5, f3 f4`, coordinates `i, j, k, l`) and the two `C4 x C2`
//! subgroups `P1 = <f1, f3, f4>`, `P2 = <f2, f3, f4>` of 16G2c2 (coordinates `a, b, c`).

use std::sync::Arc;

use crate::bar::{parse_cochain, Cochain};
use crate::error::{Error, Result};
use crate::pc::{builtin, quotient_by_central, subgroup_embedding, GroupMap, MapKind, PcPresentation};

/// The dihedral 2-cocycle representing `w`.
pub const XI_W: &str = "c1c2 + b1a2c2 + b1c1a2 + b1b2c2 + b1c1b2 + c1a2 + b1a2b2";

/// The 2-cocycle representing `x` on 16G2c2 (and `W` on 32G3f).
pub const X_REP: &str = "d1d2 + a1a2d2 + a1d1a2";

/// Subgroup names understood by [`subgroup`].
pub const SUBGROUPS: [&str; 3] = ["K", "P1", "P2"];

/// The degree-3 representative of `y` on 32G3f.
pub fn y_rep_text() -> String {
    let x12 = format!("({X_REP})");
    let w12 = format!("({XI_W})");
    format!(
        "({x12}{w12} + (e1 + e2)({x12} + {w12}) + b1c1a2 + b1c1a2c2 + b1d2 + c1a2c2 + e1a2 + e1e2)a3 + {x12}d3"
    )
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    pub group: Arc<PcPresentation>,
    pub embedding: GroupMap,
}

/// `K`, `P1` or `P2` with its embedding.
pub fn subgroup(name: &str) -> Result<Subgroup> {
    let (parent, gens, coords): (&str, &[usize], &[&str]) = match name {
        "K" => ("32G3f", &[1, 2, 3, 4], &["i", "j", "k", "l"]),
        "P1" => ("16G2c2", &[0, 2, 3], &["a", "b", "c"]),
        "P2" => ("16G2c2", &[1, 2, 3], &["a", "b", "c"]),
        other => return Err(Error::UnknownGroup(other.to_string())),
    };
    let g = builtin(parent)?;
    let words: Vec<_> = gens.iter().map(|&i| g.generator(i)).collect();
    let (h, emb) = subgroup_embedding(&g, &words, name)?;
    let h = Arc::new((*h).clone().with_coordinate_names(coords)?);
    let embedding =
        GroupMap::from_generator_images(h.clone(), g, MapKind::Embedding, emb.generator_images().to_vec())?;
    Ok(Subgroup {
        group: h,
        embedding,
    })
}

/// Quotient maps 32G3f -> 16G2c2 and 16G2c2 -> D8.
pub fn quotient_map(from: &str) -> Result<GroupMap> {
    let (g, to) = match from {
        "32G3f" => (builtin("32G3f")?, "16G2c2"),
        "16G2c2" => (builtin("16G2c2")?, "D8"),
        other => {
            return Err(Error::InvalidArgument(format!(
                "no catalog quotient map from {other}"
            )))
        }
    };
    let z = g.generator(g.k() - 1);
    Ok(quotient_by_central(&g, z, to)?.1)
}

/// A built-in group or one of the catalog subgroups.
pub fn group(name: &str) -> Result<Arc<PcPresentation>> {
    if SUBGROUPS.contains(&name) {
        Ok(subgroup(name)?.group)
    } else {
        builtin(name)
    }
}

/// Carry of adding the cyclic exponents spelled by `coords` (least significant
/// first) in two arguments: the extension cocycle of `C_{2^m}` inside `C_{2^{m+1}}`.
pub fn carry_cocycle(g: &Arc<PcPresentation>, coords: &[&str]) -> Result<Cochain> {
    let idx = coords
        .iter()
        .map(|s| {
            g.coordinate_index(s).ok_or_else(|| Error::UnknownSymbol {
                group: g.name().to_string(),
                symbol: s.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = idx.len();
    let value = |x| {
        idx.iter()
            .enumerate()
            .map(|(pos, &i)| (g.exponent(x, i) as u64) << pos)
            .sum::<u64>()
    };
    Cochain::from_fn(g.clone(), 2, |args| value(args[0]) + value(args[1]) >= 1 << m)
}

fn canonical_symbol(symbol: &str) -> &str {
    match symbol {
        "ξ" => "xi",
        "φ" | "ϕ" => "phi",
        "χ" => "chi",
        "p2" => "p'",
        "q2" => "q'",
        "r2" => "r'",
        s => s,
    }
}

/// Catalog symbols available over `group`.
pub fn symbols(group: &str) -> &'static [&'static str] {
    match group {
        "D8" => &["u", "v", "w"],
        "C2" => &["t"],
        "16G2c2" => &["u", "v", "w", "x"],
        "32G3f" => &["u", "v", "W", "y"],
        "K" => &["xi", "phi", "chi"],
        "P1" => &["p", "q", "r"],
        "P2" => &["p'", "q'", "r'"],
        _ => &[],
    }
}

/// Representative cocycle of a named class.
pub fn entry(group_name: &str, symbol: &str) -> Result<Cochain> {
    let sym = canonical_symbol(symbol);
    let unknown = || Error::UnknownSymbol {
        group: group_name.to_string(),
        symbol: symbol.to_string(),
    };
    let d8 = || builtin("D8");
    match (group_name, sym) {
        ("D8", "u") => parse_cochain(d8()?, 1, "a1"),
        ("D8", "v") => parse_cochain(d8()?, 1, "b1"),
        ("D8", "w") => parse_cochain(d8()?, 2, XI_W),
        ("C2", "t") => parse_cochain(builtin("C2")?, 1, "t1"),
        ("16G2c2", "u" | "v" | "w") => entry("D8", sym)?.inflate(&quotient_map("16G2c2")?),
        ("16G2c2", "x") => parse_cochain(builtin("16G2c2")?, 2, X_REP),
        ("32G3f", "u" | "v") => entry("16G2c2", sym)?.inflate(&quotient_map("32G3f")?),
        ("32G3f", "W") => entry("16G2c2", "x")?.inflate(&quotient_map("32G3f")?),
        ("32G3f", "y") => parse_cochain(builtin("32G3f")?, 3, &y_rep_text()),
        ("K", "xi") => parse_cochain(subgroup("K")?.group, 1, "l1"),
        ("K", "phi") => parse_cochain(subgroup("K")?.group, 1, "i1"),
        ("K", "chi") => carry_cocycle(&subgroup("K")?.group, &["i", "j", "k"]),
        ("P1", "q") | ("P2", "q'") => parse_cochain(subgroup(group_name)?.group, 1, "a1"),
        ("P1", "p") | ("P2", "p'") => parse_cochain(subgroup(group_name)?.group, 1, "c1"),
        ("P1", "r") | ("P2", "r'") => carry_cocycle(&subgroup(group_name)?.group, &["a", "b"]),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::{class_is_zero, classes_equal};

    #[test]
    fn every_entry_is_a_nonzero_class() {
        for g in ["D8", "C2", "16G2c2", "32G3f", "K", "P1", "P2"] {
            for s in symbols(g) {
                let c = entry(g, s).unwrap();
                assert!(c.is_cocycle().unwrap(), "{g} {s}");
                assert!(!class_is_zero(&c).unwrap(), "{g} {s}");
            }
        }
    }

    #[test]
    fn carry_cocycles_match_closed_forms() {
        let p1 = subgroup("P1").unwrap().group;
        let r = entry("P1", "r").unwrap();
        assert_eq!(r, parse_cochain(p1, 2, "b1b2 + a1a2b2 + a1b1a2").unwrap());
        // on the C8 factor of K the carry is a majority-style chain through i, j, k
        let k = subgroup("K").unwrap().group;
        let chi = entry("K", "chi").unwrap();
        let i1 = "i1i2";
        let c1 = format!("(j1j2 + ({i1})(j1 + j2))");
        let text = format!("k1k2 + ({c1})(k1 + k2)");
        assert_eq!(chi, parse_cochain(k, 2, &text).unwrap());
    }

    #[test]
    fn inflated_entries_are_coordinate_expressions() {
        let q16 = builtin("16G2c2").unwrap();
        assert_eq!(entry("16G2c2", "w").unwrap(), parse_cochain(q16, 2, XI_W).unwrap());
        let g = builtin("32G3f").unwrap();
        assert_eq!(entry("32G3f", "u").unwrap(), parse_cochain(g.clone(), 1, "a1").unwrap());
        assert_eq!(entry("32G3f", "W").unwrap(), parse_cochain(g, 2, X_REP).unwrap());
    }

    #[test]
    fn subgroup_coordinates_follow_the_inclusion() {
        // f2^i f3^j f5^k (f3 f4)^l  ->  b = i, c = j + l, d = l
        let k = subgroup("K").unwrap();
        let g = builtin("32G3f").unwrap();
        for x in k.group.elements() {
            let e = k.group.exponents(x);
            let img = g.exponents(k.embedding.apply(x));
            assert_eq!(img[0], 0);
            assert_eq!(img[1], e[0]);
            assert_eq!(img[2], e[1] ^ e[3]);
            assert_eq!(img[3], e[3]);
        }
        assert_eq!(k.group.abelian_invariants(), Some(vec![8, 2]));
    }

    #[test]
    fn unknown_symbols() {
        assert!(matches!(entry("D8", "x"), Err(Error::UnknownSymbol { .. })));
        assert!(matches!(entry("Q8", "u"), Err(Error::UnknownSymbol { .. })));
        assert!(subgroup("L").is_err());
        assert_eq!(entry("K", "ξ").unwrap(), entry("K", "xi").unwrap());
        assert_eq!(entry("P2", "r2").unwrap(), entry("P2", "r'").unwrap());
    }

    #[test]
    fn w_and_x_restrict_as_tabulated() {
        let p1 = subgroup("P1").unwrap();
        let res = |s: &str| entry("16G2c2", s).unwrap().restrict(&p1.embedding).unwrap();
        let p = entry("P1", "p").unwrap();
        let q = entry("P1", "q").unwrap();
        let want = p.cup(&p).unwrap().add(&p.cup(&q).unwrap()).unwrap();
        assert!(classes_equal(&res("w"), &want).unwrap());
        assert!(classes_equal(&res("x"), &entry("P1", "r").unwrap()).unwrap());
    }
}
