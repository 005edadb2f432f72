//! Checks of the structural facts about the denominators `q_n`: positivity,
//! the shape of every decrease `q_n <= q_{n-1}`, and the lower bounds that
//! make `1/q_n → 0` even though `q_n` is not monotone.

use num_bigint::BigInt;

use super::ExpansionTrace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub n: usize,
    pub check: &'static str,
    pub detail: String,
}

/// Returns every violated check on the stored digits, bits and convergents.
/// An empty list means the trace is consistent.
pub fn lemma_audit(trace: &ExpansionTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_max = trace.len();
    let q = |i: usize| trace.q(i as isize);
    let digit = |i: usize| trace.steps[i - 1].digit.value();
    let omega = |i: usize| trace.omega(i);
    let mut flag = |n: usize, check: &'static str, detail: String| {
        out.push(Violation { n, check, detail });
    };

    if n_max >= 1 && q(1) < q(0) {
        flag(1, "q1>=q0", format!("q_1 = {} < 1", q(1)));
    }

    for n in 2..=n_max {
        let qn = q(n);
        let qn1 = q(n - 1);
        if qn <= BigInt::from(0) {
            flag(n, "qn>0", format!("q_{n} = {qn}"));
            continue;
        }
        if qn > qn1 {
            continue;
        }
        // q_n <= q_{n-1}
        if qn == qn1 {
            flag(n, "qn!=qn-1", format!("q_{n} = q_{} = {qn}", n - 1));
        }
        if omega(n - 1) != 1 || digit(n) != 1 || omega(n) != 0 {
            flag(
                n,
                "decrease-shape",
                format!(
                    "q_{n} <= q_{} but (ω_{}, d_{n}, ω_{n}) = ({}, {}, {})",
                    n - 1,
                    n - 1,
                    omega(n - 1),
                    digit(n),
                    omega(n)
                ),
            );
        }
        if q(n - 2) >= qn1 {
            flag(n, "qn-2<qn-1", format!("q_{} = {} >= q_{} = {qn1}", n - 2, q(n - 2), n - 1));
        }
        if n < n_max && q(n + 1) <= qn1 {
            flag(n, "qn-1<qn+1", format!("q_{} = {} <= q_{} = {qn1}", n + 1, q(n + 1), n - 1));
        }
        if qn == qn1 {
            continue;
        }
        // Strict decrease: lower bounds by case on d_{n-1}.
        let d_prev = digit(n - 1);
        if d_prev <= 1 {
            flag(n, "dn-1>1", format!("d_{} = {d_prev}", n - 1));
        } else if d_prev > 2 {
            if qn <= q(n - 2) {
                flag(n, "case-i", format!("q_{n} = {qn} <= q_{} = {}", n - 2, q(n - 2)));
            }
        } else {
            let last_other = (1..n - 1)
                .rev()
                .find(|&k| (omega(k), digit(k)) != (1, 2));
            let all_twos = last_other.is_none() && (omega(n - 1), d_prev) == (1, 2);
            match last_other {
                None if all_twos => {
                    if qn != BigInt::from(1) || qn1 != BigInt::from(n as u64) {
                        flag(
                            n,
                            "case-ii",
                            format!("expected q_{n} = 1 and q_{} = {n}, got {qn} and {qn1}", n - 1),
                        );
                    }
                }
                None => {}
                Some(k) if qn <= q(k - 1) => {
                    flag(n, "case-iii", format!("q_{n} = {qn} <= q_{} = {}", k - 1, q(k - 1)));
                }
                Some(_) => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand;
    use crate::omega::OmegaWord;
    use crate::point::ExactPoint;

    #[test]
    fn clean_traces_have_no_violations() {
        for (p, q) in [(1, 2), (-3, 7), (13, 21), (-1, 1), (99, 100)] {
            for bits in [vec![1u8], vec![0], vec![1, 1, 0], vec![0, 1]] {
                let mut w = OmegaWord::periodic(bits).unwrap();
                let t = expand(&ExactPoint::rational(p, q), &mut w, 300).unwrap();
                assert_eq!(lemma_audit(&t), vec![]);
            }
        }
    }

    #[test]
    fn twos_chain_satisfies_case_ii() {
        for n in 2..=40usize {
            let mut bits = vec![1u8; n - 1];
            bits.push(0);
            let t = expand(&ExactPoint::rational(1, 1), &mut OmegaWord::explicit(bits).unwrap(), n)
                .unwrap();
            assert_eq!(t.q(n as isize), BigInt::from(1));
            assert_eq!(t.q(n as isize - 1), BigInt::from(n));
            assert!(lemma_audit(&t).is_empty());
        }
    }

    #[test]
    fn injected_equal_denominators_are_flagged() {
        let mut w = OmegaWord::periodic(vec![1, 0, 0]).unwrap();
        let mut t = expand(&ExactPoint::rational(17, 29), &mut w, 12).unwrap();
        assert!(t.len() >= 4);
        let q2 = t.convergents[1].1.clone();
        t.convergents[2].1 = q2;
        let v = lemma_audit(&t);
        assert!(v.iter().any(|v| v.check == "qn!=qn-1" && v.n == 3), "{v:?}");
    }
}
