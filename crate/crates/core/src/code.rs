//! Cross-object linear codes.
//!
//! A code over `K` objects and `N` servers is an `N x K` coefficient matrix:
//! server `i` stores the symbol `sum_k coeffs[i][k] * x_k`, applied
//! coordinate-wise to the object values. Servers and objects are 0-based
//! here; scenario files and rendered output use 1-based indices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::CodeError;
use crate::field::{PrimeField, Value};

/// On-disk description of a code: `{ "field_p": 7, "value_len": 1, "coeffs": [[1,0,0], ...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    #[serde(default = "default_field_p")]
    pub field_p: u64,
    #[serde(default = "default_value_len")]
    pub value_len: usize,
    pub coeffs: Vec<Vec<i64>>,
}

fn default_field_p() -> u64 {
    257
}

fn default_value_len() -> usize {
    1
}

/// A set of servers whose symbols determine one object, with the
/// coefficients that combine them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoverySet {
    pub object: usize,
    pub members: BTreeSet<usize>,
    /// `sum_{j in members} decode_coeffs[j] * symbol_j == x_object`.
    pub decode_coeffs: BTreeMap<usize, u64>,
}

impl RecoverySet {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// A linear code with its recovery structure precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    field: PrimeField,
    value_len: usize,
    coeffs: Vec<Vec<u64>>,
    objects_at: Vec<BTreeSet<usize>>,
    holders: Vec<BTreeSet<usize>>,
    minimal: Vec<Vec<RecoverySet>>,
}

impl LinearCode {
    /// Builds a code; coefficients are reduced into the field.
    pub fn new(field: PrimeField, value_len: usize, coeffs: Vec<Vec<i64>>) -> Result<Self, CodeError> {
        let n = coeffs.len();
        if n == 0 {
            return Err(CodeError::Dimension("code has no servers".into()));
        }
        let k = coeffs[0].len();
        if k == 0 {
            return Err(CodeError::Dimension("code has no objects".into()));
        }
        if value_len == 0 {
            return Err(CodeError::Dimension("value_len must be positive".into()));
        }
        if let Some((row, r)) = coeffs.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(CodeError::Dimension(format!(
                "row {} has {} coefficients, expected {k}",
                row + 1,
                r.len()
            )));
        }
        let coeffs: Vec<Vec<u64>> = coeffs
            .iter()
            .map(|r| r.iter().map(|&c| field.element(c)).collect())
            .collect();

        let objects_at = coeffs.iter().map(|r| (0..k).filter(|&j| r[j] != 0).collect()).collect();
        let holders = (0..k)
            .map(|obj| (0..n).filter(|&i| coeffs[i][obj] != 0).collect())
            .collect();

        let mut code = Self {
            field,
            value_len,
            coeffs,
            objects_at,
            holders,
            minimal: Vec::new(),
        };
        let mut minimal = Vec::with_capacity(k);
        for obj in 0..k {
            let sets = code.enumerate_minimal(obj);
            if sets.is_empty() {
                return Err(CodeError::Unrecoverable(obj));
            }
            minimal.push(sets);
        }
        code.minimal = minimal;
        Ok(code)
    }

    pub fn from_spec(spec: &CodeSpec) -> Result<Self, CodeError> {
        let field = PrimeField::new(spec.field_p)?;
        Self::new(field, spec.value_len, spec.coeffs.clone())
    }

    pub fn to_spec(&self) -> CodeSpec {
        CodeSpec {
            field_p: self.field.modulus(),
            value_len: self.value_len,
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().map(|&c| c as i64).collect())
                .collect(),
        }
    }

    /// `[x1, x2, x1+x2+x3, x1+x2, x3]`: five servers, three objects, with
    /// `X1`, `X2`, `X3` readable locally at servers 1, 2 and 5.
    pub fn five_server(field: PrimeField, value_len: usize) -> Self {
        Self::new(
            field,
            value_len,
            vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![1, 1, 1],
                vec![1, 1, 0],
                vec![0, 0, 1],
            ],
        )
        .expect("five-server code is valid")
    }

    /// `[x1, x2, x2, x1+x3, x3]`: the lower-average-latency alternative on the
    /// same five-server graph.
    pub fn five_server_alternate(field: PrimeField, value_len: usize) -> Self {
        Self::new(
            field,
            value_len,
            vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 1, 0],
                vec![1, 0, 1],
                vec![0, 0, 1],
            ],
        )
        .expect("alternate five-server code is valid")
    }

    /// `[x1, x2, x1+x2, x1+x2+x3, 2x1+x2+x3]`, a five-server parity code
    /// with a non-unit coefficient.
    pub fn parity_example(field: PrimeField, value_len: usize) -> Self {
        Self::new(
            field,
            value_len,
            vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![1, 1, 0],
                vec![1, 1, 1],
                vec![2, 1, 1],
            ],
        )
        .expect("parity example code is valid")
    }

    /// Every server stores every object.
    pub fn replication(field: PrimeField, value_len: usize, n: usize) -> Self {
        Self::new(field, value_len, vec![vec![1]; n]).expect("replication code is valid")
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn value_len(&self) -> usize {
        self.value_len
    }

    /// Number of servers.
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of objects.
    pub fn k(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeff(&self, server: usize, object: usize) -> u64 {
        self.coeffs[server][object]
    }

    pub fn coeffs(&self) -> &[Vec<u64>] {
        &self.coeffs
    }

    pub fn zero_value(&self) -> Value {
        Value::zero(self.value_len)
    }

    fn check_value(&self, v: &Value) -> Result<(), CodeError> {
        if v.len() != self.value_len {
            return Err(CodeError::Dimension(format!(
                "value has length {}, expected {}",
                v.len(),
                self.value_len
            )));
        }
        Ok(())
    }

    fn check_server(&self, server: usize) -> Result<(), CodeError> {
        if server >= self.n() {
            return Err(CodeError::ServerOutOfRange { server, n: self.n() });
        }
        Ok(())
    }

    fn check_object(&self, object: usize) -> Result<(), CodeError> {
        if object >= self.k() {
            return Err(CodeError::ObjectOutOfRange { object, k: self.k() });
        }
        Ok(())
    }

    /// The symbol server `i` stores for object values `x`.
    pub fn encode_symbol(&self, server: usize, x: &[Value]) -> Result<Value, CodeError> {
        self.check_server(server)?;
        if x.len() != self.k() {
            return Err(CodeError::Dimension(format!(
                "expected {} object values, got {}",
                self.k(),
                x.len()
            )));
        }
        let mut out = self.zero_value();
        for (obj, v) in x.iter().enumerate() {
            self.check_value(v)?;
            out.axpy(&self.field, self.coeffs[server][obj], v);
        }
        Ok(out)
    }

    /// Every server's symbol for object values `x`.
    pub fn encode(&self, x: &[Value]) -> Result<Vec<Value>, CodeError> {
        (0..self.n()).map(|i| self.encode_symbol(i, x)).collect()
    }

    /// Replaces object `object`'s contribution to a server symbol:
    /// `symbol + coeff * (new - old)`.
    pub fn reencode(
        &self,
        server: usize,
        object: usize,
        symbol: &Value,
        old: &Value,
        new: &Value,
    ) -> Result<Value, CodeError> {
        self.check_server(server)?;
        self.check_object(object)?;
        self.check_value(symbol)?;
        self.check_value(old)?;
        self.check_value(new)?;
        let c = self.coeffs[server][object];
        let mut out = symbol.clone();
        out.axpy(&self.field, c, new);
        out.axpy(&self.field, self.field.neg(c), old);
        Ok(out)
    }

    /// Objects server `server`'s symbol depends on.
    pub fn objects_at(&self, server: usize) -> &BTreeSet<usize> {
        &self.objects_at[server]
    }

    /// Servers whose symbol depends on `object`.
    pub fn holders(&self, object: usize) -> &BTreeSet<usize> {
        &self.holders[object]
    }

    /// Decode coefficients for `object` from the servers in `set`, or `None`
    /// when the unit vector for `object` is not in the span of their rows.
    ///
    /// Gaussian elimination pivots on the lowest server index first and sets
    /// free variables to zero, so the returned coefficients are deterministic.
    #[allow(clippy::needless_range_loop)]
    pub fn is_recovery_set(&self, set: &BTreeSet<usize>, object: usize) -> Option<RecoverySet> {
        if object >= self.k() || set.iter().any(|&j| j >= self.n()) {
            return None;
        }
        let f = &self.field;
        let members: Vec<usize> = set.iter().copied().collect();
        let cols = members.len();
        let rows = self.k();
        // Augmented system: column c is server members[c]'s coefficient row.
        let mut a: Vec<Vec<u64>> = (0..rows)
            .map(|r| {
                let mut row: Vec<u64> = members.iter().map(|&j| self.coeffs[j][r]).collect();
                row.push(u64::from(r == object));
                row
            })
            .collect();

        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..cols {
            let Some(sel) = (prow..rows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(prow, sel);
            let inv = f.inv(a[prow][col]).expect("pivot is nonzero");
            for c in col..=cols {
                a[prow][c] = f.mul(a[prow][c], inv);
            }
            for r in 0..rows {
                if r != prow && a[r][col] != 0 {
                    let factor = a[r][col];
                    for c in col..=cols {
                        let sub = f.mul(factor, a[prow][c]);
                        a[r][c] = f.sub(a[r][c], sub);
                    }
                }
            }
            pivots.push((prow, col));
            prow += 1;
            if prow == rows {
                break;
            }
        }
        if (prow..rows).any(|r| a[r][cols] != 0) {
            return None;
        }
        let mut decode_coeffs: BTreeMap<usize, u64> = members.iter().map(|&j| (j, 0)).collect();
        for (r, c) in pivots {
            decode_coeffs.insert(members[c], a[r][cols]);
        }
        Some(RecoverySet {
            object,
            members: set.clone(),
            decode_coeffs,
        })
    }

    fn enumerate_minimal(&self, object: usize) -> Vec<RecoverySet> {
        let n = self.n();
        let mut found: Vec<RecoverySet> = Vec::new();
        for size in 1..=n {
            for subset in subsets_of_size(n, size) {
                if found.iter().any(|rs| rs.members.is_subset(&subset)) {
                    continue;
                }
                if let Some(rs) = self.is_recovery_set(&subset, object) {
                    found.push(rs);
                }
            }
        }
        found
    }

    /// Inclusion-minimal recovery sets for `object`, ordered by size then
    /// lexicographically.
    pub fn minimal_recovery_sets(&self, object: usize) -> Result<&[RecoverySet], CodeError> {
        self.check_object(object)?;
        Ok(&self.minimal[object])
    }

    /// True when `server` alone recovers `object`.
    pub fn locally_decodable(&self, server: usize, object: usize) -> Option<&RecoverySet> {
        self.minimal[object]
            .iter()
            .find(|rs| rs.is_singleton() && rs.members.contains(&server))
    }

    /// First minimal recovery set for `object` contained in `available`.
    pub fn recovery_set_within(&self, object: usize, available: &BTreeSet<usize>) -> Option<&RecoverySet> {
        self.minimal[object].iter().find(|rs| rs.members.is_subset(available))
    }

    /// `sum decode_coeffs[j] * symbols[j]`.
    pub fn decode(&self, rs: &RecoverySet, symbols: &BTreeMap<usize, Value>) -> Result<Value, CodeError> {
        let mut out = self.zero_value();
        for (&j, &c) in &rs.decode_coeffs {
            let sym = symbols.get(&j).ok_or(CodeError::MissingSymbol(j))?;
            self.check_value(sym)?;
            out.axpy(&self.field, c, sym);
        }
        Ok(out)
    }
}

/// All `size`-element subsets of `0..n` in lexicographic order.
pub(crate) fn subsets_of_size(n: usize, size: usize) -> Vec<BTreeSet<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == size {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    fn vals(xs: &[u64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::new(vec![x])).collect()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().map(|x| x - 1).collect()
    }

    fn one_based(sets: &[RecoverySet]) -> Vec<Vec<usize>> {
        sets.iter()
            .map(|rs| rs.members.iter().map(|m| m + 1).collect())
            .collect()
    }

    #[test]
    fn encode_parity_example() {
        // 2*1 + 2 + 3 = 7 = 0 (mod 7)
        let code = LinearCode::parity_example(gf7(), 1);
        assert_eq!(code.encode(&vals(&[1, 2, 3])).unwrap(), vals(&[1, 2, 3, 6, 0]));
    }

    #[test]
    fn encode_zero_is_zero() {
        let code = LinearCode::parity_example(gf7(), 3);
        let x = vec![Value::zero(3); 3];
        assert!(code.encode(&x).unwrap().iter().all(Value::is_zero));
    }

    #[test]
    fn encode_replication_copies() {
        let code = LinearCode::new(gf7(), 1, vec![vec![1], vec![1]]).unwrap();
        assert_eq!(code.encode(&vals(&[4])).unwrap(), vals(&[4, 4]));
    }

    #[test]
    fn encode_rejects_wrong_arity() {
        let code = LinearCode::parity_example(gf7(), 1);
        assert!(matches!(code.encode(&vals(&[1, 2])), Err(CodeError::Dimension(_))));
        let bad = vec![Value::new(vec![1, 1]), Value::new(vec![1]), Value::new(vec![1])];
        assert!(matches!(code.encode(&bad), Err(CodeError::Dimension(_))));
    }

    #[test]
    fn reencode_nonunit_coefficient() {
        // server 5 row [2,1,1]: replacing x1 adds 2*(new - old)
        let f = gf7();
        let code = LinearCode::parity_example(f, 1);
        let y5 = Value::new(vec![0]);
        let out = code
            .reencode(4, 0, &y5, &Value::new(vec![1]), &Value::new(vec![4]))
            .unwrap();
        assert_eq!(out, Value::new(vec![f.element(2 * 4 - 2)]));
    }

    #[test]
    fn reencode_identity_and_fresh_encode() {
        let code = LinearCode::parity_example(gf7(), 1);
        let y4 = Value::new(vec![6]);
        let same = code
            .reencode(3, 1, &y4, &Value::new(vec![2]), &Value::new(vec![2]))
            .unwrap();
        assert_eq!(same, y4);
        let out = code
            .reencode(3, 1, &y4, &Value::new(vec![2]), &Value::new(vec![5]))
            .unwrap();
        assert_eq!(out, Value::new(vec![2]));
        assert_eq!(code.encode(&vals(&[1, 5, 3])).unwrap()[3], out);
    }

    #[test]
    fn objects_at_rows() {
        let code = LinearCode::parity_example(gf7(), 1);
        assert_eq!(code.objects_at(2), &set(&[1, 2]));
        assert_eq!(code.objects_at(4), &set(&[1, 2, 3]));
        let zero_row = LinearCode::new(gf7(), 1, vec![vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        assert!(zero_row.objects_at(2).is_empty());
    }

    #[test]
    fn recovery_set_three_four_for_x3() {
        let code = LinearCode::parity_example(gf7(), 1);
        let rs = code.is_recovery_set(&set(&[3, 4]), 2).unwrap();
        assert_eq!(rs.decode_coeffs[&2], gf7().element(-1));
        assert_eq!(rs.decode_coeffs[&3], 1);
        assert!(code.is_recovery_set(&set(&[1]), 1).is_none());
        let one = code.is_recovery_set(&set(&[1]), 0).unwrap();
        assert_eq!(one.decode_coeffs[&0], 1);
    }

    #[test]
    fn decode_three_four() {
        let code = LinearCode::parity_example(gf7(), 1);
        let rs = code.is_recovery_set(&set(&[3, 4]), 2).unwrap();
        let symbols = BTreeMap::from([(2, Value::new(vec![3])), (3, Value::new(vec![6]))]);
        assert_eq!(code.decode(&rs, &symbols).unwrap(), Value::new(vec![3]));
        let missing = BTreeMap::from([(2, Value::new(vec![3]))]);
        assert_eq!(code.decode(&rs, &missing), Err(CodeError::MissingSymbol(3)));
    }

    #[test]
    fn decode_singleton_passthrough() {
        let code = LinearCode::five_server(gf7(), 2);
        let rs = code.locally_decodable(4, 2).unwrap().clone();
        let v = Value::new(vec![5, 6]);
        let symbols = BTreeMap::from([(4, v.clone())]);
        assert_eq!(code.decode(&rs, &symbols).unwrap(), v);
    }

    #[test]
    fn five_server_minimal_sets() {
        let code = LinearCode::five_server(gf7(), 1);
        assert_eq!(
            one_based(code.minimal_recovery_sets(0).unwrap()),
            vec![vec![1], vec![2, 4], vec![2, 3, 5]]
        );
        assert_eq!(
            one_based(code.minimal_recovery_sets(1).unwrap()),
            vec![vec![2], vec![1, 4], vec![1, 3, 5]]
        );
        assert_eq!(
            one_based(code.minimal_recovery_sets(2).unwrap()),
            vec![vec![5], vec![3, 4], vec![1, 2, 3]]
        );
    }

    #[test]
    fn parity_example_minimal_sets_differ_from_five_server() {
        let code = LinearCode::parity_example(gf7(), 1);
        assert_eq!(
            one_based(code.minimal_recovery_sets(0).unwrap()),
            vec![vec![1], vec![2, 3], vec![4, 5]]
        );
    }

    #[test]
    fn alternate_code_minimal_sets() {
        let code = LinearCode::five_server_alternate(gf7(), 1);
        assert_eq!(
            one_based(code.minimal_recovery_sets(0).unwrap()),
            vec![vec![1], vec![4, 5]]
        );
        assert_eq!(
            one_based(code.minimal_recovery_sets(1).unwrap()),
            vec![vec![2], vec![3]]
        );
        assert_eq!(
            one_based(code.minimal_recovery_sets(2).unwrap()),
            vec![vec![5], vec![1, 4]]
        );
    }

    #[test]
    fn unrecoverable_object_rejected() {
        let err = LinearCode::new(gf7(), 1, vec![vec![1, 1], vec![2, 2]]).unwrap_err();
        assert!(matches!(err, CodeError::Unrecoverable(_)));
    }

    #[test]
    fn ragged_matrix_rejected() {
        let err = LinearCode::new(gf7(), 1, vec![vec![1, 0], vec![1]]).unwrap_err();
        assert!(matches!(err, CodeError::Dimension(_)));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let json = r#"{ "field_p": 7, "value_len": 1, "coeffs": [[1,0,0],[0,1,0],[1,1,1],[1,1,0],[0,0,1]] }"#;
        let spec: CodeSpec = serde_json::from_str(json).unwrap();
        let code = LinearCode::from_spec(&spec).unwrap();
        assert_eq!(code, LinearCode::five_server(gf7(), 1));
        assert_eq!(code.to_spec(), spec);
    }

    #[test]
    fn subsets_enumerated_lexicographically() {
        let s = subsets_of_size(4, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], BTreeSet::from([0, 1]));
        assert_eq!(s[5], BTreeSet::from([2, 3]));
    }
}
