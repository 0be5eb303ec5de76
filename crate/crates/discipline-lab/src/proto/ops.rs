//! Point operations on split object types: field access, concretization,
//! method invocation, width/depth subtyping, method attachment, and the
//! effect-variant least upper bound kept as a contrast check.

use super::types::{field_subtype, FieldType, ObjType, Row};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtoError {
    /// Field not present where required.
    Absent { field: String },
    /// Concretization failed: listed fields are missing or mistyped.
    NotConcrete { problems: Vec<String> },
    /// Method invocation on a non-concrete receiver.
    NotConcreteReceiver,
    NoSuchMethod { method: String },
    ArgMismatch { method: String, detail: String },
    /// Method attachment demands more than the prototypal bound grants.
    AttachExceeds { excess: Vec<String> },
    /// Effect-variant subset check failed: the method writes fields the
    /// receiver does not locally own.
    NotCallable { method: String, missing: Vec<String> },
}

impl ProtoError {
    pub fn rule(&self) -> &'static str {
        match self {
            ProtoError::Absent { .. } => "ABSENT",
            ProtoError::NotConcrete { .. } => "NOT-CONCRETE",
            ProtoError::NotConcreteReceiver => "NOT-CONCRETE-RECEIVER",
            ProtoError::NoSuchMethod { .. } => "NO-SUCH-METHOD",
            ProtoError::ArgMismatch { .. } => "ARG-MISMATCH",
            ProtoError::AttachExceeds { .. } => "ATTACH-EXCEEDS",
            ProtoError::NotCallable { .. } => "NOT-CALLABLE",
        }
    }
}

impl fmt::Display for ProtoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtoError::Absent { field } => write!(f, "field `{field}` is absent"),
            ProtoError::NotConcrete { problems } => {
                write!(f, "method-accessed fields unsatisfied: {}", problems.join(", "))
            }
            ProtoError::NotConcreteReceiver => {
                write!(f, "receiver is not concrete; methods may not be invoked on it")
            }
            ProtoError::NoSuchMethod { method } => write!(f, "no method `{method}`"),
            ProtoError::ArgMismatch { method, detail } => {
                write!(f, "bad arguments for `{method}`: {detail}")
            }
            ProtoError::AttachExceeds { excess } => {
                write!(f, "attached method exceeds the prototypal bound: {}", excess.join(", "))
            }
            ProtoError::NotCallable { method, missing } => {
                write!(
                    f,
                    "`{method}` writes fields not locally present on the receiver: {}",
                    missing.join(", ")
                )
            }
        }
    }
}

/// True iff `f` may be written on an object of type `t`.
pub fn check_field_write(t: &ObjType, f: &str) -> bool {
    t.w.contains_key(f)
}

/// Type of a field read from either physical row.
pub fn check_field_read<'a>(t: &'a ObjType, f: &str) -> Result<&'a FieldType, ProtoError> {
    t.physical(f).ok_or_else(|| ProtoError::Absent { field: f.to_string() })
}

/// Check a prototypal type's method-accessed rows against its physical
/// rows; on success the rows are discarded and the result is concrete.
pub fn concretize(t: &ObjType) -> Result<ObjType, ProtoError> {
    let Some(macc) = &t.m_acc else {
        if t.concrete {
            return Ok(t.clone());
        }
        return Err(ProtoError::NotConcrete {
            problems: vec!["type carries no method-accessed rows".to_string()],
        });
    };
    let mut problems = Vec::new();
    for (name, demanded) in &macc.mw {
        match t.w.get(name) {
            None => problems.push(name.clone()),
            Some(actual) if actual != demanded => problems.push(format!("{name} (mistyped)")),
            Some(_) => {}
        }
    }
    for (name, demanded) in &macc.mr {
        match t.physical(name) {
            None => problems.push(name.clone()),
            Some(actual) if !field_subtype(actual, demanded) => {
                problems.push(format!("{name} (mistyped)"))
            }
            Some(_) => {}
        }
    }
    if !problems.is_empty() {
        return Err(ProtoError::NotConcrete { problems });
    }
    Ok(ObjType::concrete(t.r.clone(), t.w.clone()))
}

/// Invoke a method on a concrete receiver; returns the method's return
/// type. Effect-variant methods additionally require their write effect to
/// be locally present.
pub fn check_method_call(
    t: &ObjType,
    method: &str,
    args: &[FieldType],
) -> Result<Option<FieldType>, ProtoError> {
    if !t.concrete {
        return Err(ProtoError::NotConcreteReceiver);
    }
    let Some(FieldType::Method(mt)) = t.physical(method) else {
        return Err(ProtoError::NoSuchMethod { method: method.to_string() });
    };
    if args.len() != mt.params.len() {
        return Err(ProtoError::ArgMismatch {
            method: method.to_string(),
            detail: format!("expected {} arguments, got {}", mt.params.len(), args.len()),
        });
    }
    for (i, (arg, param)) in args.iter().zip(&mt.params).enumerate() {
        if !field_subtype(arg, param) {
            return Err(ProtoError::ArgMismatch {
                method: method.to_string(),
                detail: format!("argument {i} has type {arg}, parameter wants {param}"),
            });
        }
    }
    if let Some(eff) = &mt.wr_eff {
        let missing: Vec<String> =
            eff.iter().filter(|f| !t.w.contains_key(*f)).cloned().collect();
        if !missing.is_empty() {
            return Err(ProtoError::NotCallable { method: method.to_string(), missing });
        }
    }
    Ok(mt.ret.as_deref().cloned())
}

/// Width/depth subtyping on concrete types: `a <= b` when every field `b`
/// promises is physically provided by `a` — readable fields with depth
/// subtyping, writable fields invariantly.
pub fn subtype_np(a: &ObjType, b: &ObjType) -> bool {
    if !a.concrete || !b.concrete {
        return false;
    }
    b.r.iter().all(|(name, bty)| a.physical(name).is_some_and(|aty| field_subtype(aty, bty)))
        && b.w.iter().all(|(name, bty)| a.w.get(name) == Some(bty))
}

/// Attach (or replace) a method on a prototypal type. The method's assumed
/// receiver type states its demands: reads must fit inside `mr ∪ mw`,
/// writes inside `mw`. On success the method lands in the readable row.
pub fn attach_method(
    t: &ObjType,
    method: &str,
    receiver_assumed: &ObjType,
    sig: &FieldType,
) -> Result<ObjType, ProtoError> {
    let Some(macc) = &t.m_acc else {
        return Err(ProtoError::AttachExceeds {
            excess: vec!["receiver type is not prototypal".to_string()],
        });
    };
    debug_assert!(sig.as_method().is_some(), "attached value must be a method");
    let mut excess = Vec::new();
    for (name, demanded) in &receiver_assumed.w {
        match macc.mw.get(name) {
            Some(bound) if bound == demanded => {}
            _ => excess.push(format!("write {name}")),
        }
    }
    for (name, demanded) in &receiver_assumed.r {
        match macc.mr.get(name).or_else(|| macc.mw.get(name)) {
            Some(bound) if field_subtype(bound, demanded) => {}
            _ => excess.push(format!("read {name}")),
        }
    }
    if t.w.contains_key(method) {
        excess.push(format!("`{method}` collides with a writable field"));
    }
    if !excess.is_empty() {
        return Err(ProtoError::AttachExceeds { excess });
    }
    let mut out = t.clone();
    out.r.insert(method.to_string(), sig.clone());
    Ok(out)
}

/// Result of an effect-variant least-upper-bound computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectLub {
    pub lub: ObjType,
    /// Methods of the bound whose write effects escape the bound's local
    /// fields, hence may not be invoked through it.
    pub not_callable: Vec<String>,
}

fn join_field(a: &FieldType, b: &FieldType) -> Option<FieldType> {
    match (a, b) {
        (FieldType::Number, FieldType::Number) => Some(FieldType::Number),
        (FieldType::Method(ma), FieldType::Method(mb)) => {
            if ma.params != mb.params {
                return None;
            }
            let ret = match (&ma.ret, &mb.ret) {
                (None, None) => None,
                (Some(ra), Some(rb)) => Some(join_field(ra, rb)?),
                _ => return None,
            };
            let wr_eff = match (&ma.wr_eff, &mb.wr_eff) {
                (None, None) => None,
                (Some(ea), Some(eb)) => Some(ea.union(eb).cloned().collect::<BTreeSet<_>>()),
                _ => return None,
            };
            Some(FieldType::Method(super::types::MethodType {
                params: ma.params.clone(),
                ret: ret.map(Box::new),
                wr_eff,
            }))
        }
        _ => None,
    }
}

/// Width/depth least upper bound of two effect-variant types, with method
/// effects unioned. Returns the bound together with the methods that the
/// subset check `wr_eff ⊆ w` rejects — for distinct implementations the
/// common bound usually owns neither backing field, which is the point of
/// keeping this checker around.
pub fn lub_effect_variant(a: &ObjType, b: &ObjType) -> EffectLub {
    debug_assert!(a.m_acc.is_none() && b.m_acc.is_none(), "effect-variant types carry no mAcc");
    let mut w = Row::new();
    for (name, aty) in &a.w {
        if b.w.get(name) == Some(aty) {
            w.insert(name.clone(), aty.clone());
        }
    }
    let mut r = Row::new();
    for (name, aty) in a.r.iter().chain(a.w.iter()) {
        if w.contains_key(name) {
            continue;
        }
        if let Some(bty) = b.physical(name) {
            if let Some(joined) = join_field(aty, bty) {
                r.insert(name.clone(), joined);
            }
        }
    }
    let lub = ObjType { r, w, m_acc: None, concrete: a.concrete && b.concrete };
    let mut not_callable = Vec::new();
    for (name, ft) in lub.r.iter().chain(lub.w.iter()) {
        if let FieldType::Method(mt) = ft {
            if let Some(eff) = &mt.wr_eff {
                if !eff.iter().all(|f| lub.w.contains_key(f)) {
                    not_callable.push(name.clone());
                }
            }
        }
    }
    EffectLub { lub, not_callable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proto::types::{row, MethodType};

    fn inc_sig() -> FieldType {
        FieldType::method(vec![], None)
    }

    /// The counter instance type: `{inc: () -> () | x: number}` plus
    /// method-accessed rows `{- | x: number}`.
    fn counter_prototypal() -> ObjType {
        ObjType::prototypal(
            row(&[("inc", inc_sig())]),
            row(&[("x", FieldType::Number)]),
            Row::new(),
            row(&[("x", FieldType::Number)]),
        )
    }

    fn counter_nc() -> ObjType {
        ObjType::concrete(row(&[("inc", inc_sig())]), row(&[("x", FieldType::Number)]))
    }

    fn prototype_type() -> ObjType {
        ObjType::prototypal(
            row(&[("inc", inc_sig())]),
            Row::new(),
            Row::new(),
            row(&[("x", FieldType::Number)]),
        )
    }

    #[test]
    fn field_writes_require_local_presence() {
        assert!(check_field_write(&counter_nc(), "x"));
        assert!(!check_field_write(&counter_nc(), "y"));
        assert!(!check_field_write(&prototype_type(), "x"));
    }

    #[test]
    fn field_reads_cover_inherited_and_local() {
        let t = counter_nc();
        assert!(matches!(check_field_read(&t, "inc"), Ok(FieldType::Method(_))));
        assert!(matches!(check_field_read(&t, "x"), Ok(FieldType::Number)));
        let empty = ObjType::concrete(Row::new(), Row::new());
        assert_eq!(
            check_field_read(&empty, "anything"),
            Err(ProtoError::Absent { field: "anything".to_string() })
        );
    }

    #[test]
    fn concretize_discharges_method_rows() {
        let nc = concretize(&counter_prototypal()).unwrap();
        assert_eq!(nc, counter_nc());
        assert!(nc.concrete && nc.m_acc.is_none());
    }

    #[test]
    fn concretize_rejects_the_bare_prototype() {
        let err = concretize(&prototype_type()).unwrap_err();
        match err {
            ProtoError::NotConcrete { problems } => assert_eq!(problems, ["x"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn concretize_of_trivial_prototypal_type_is_the_empty_concrete_type() {
        let t = ObjType::prototypal(Row::new(), Row::new(), Row::new(), Row::new());
        let nc = concretize(&t).unwrap();
        assert_eq!(nc, ObjType::concrete(Row::new(), Row::new()));
    }

    #[test]
    fn calls_need_a_concrete_receiver() {
        assert_eq!(check_method_call(&counter_nc(), "inc", &[]), Ok(None));
        assert_eq!(
            check_method_call(&prototype_type(), "inc", &[]),
            Err(ProtoError::NotConcreteReceiver)
        );
        assert_eq!(
            check_method_call(&counter_nc(), "dec", &[]),
            Err(ProtoError::NoSuchMethod { method: "dec".to_string() })
        );
    }

    #[test]
    fn call_returning_number_through_wider_type() {
        let t = ObjType::concrete(
            row(&[
                ("inc", inc_sig()),
                ("incAndCount", FieldType::method(vec![], Some(FieldType::Number))),
            ]),
            row(&[("x", FieldType::Number)]),
        );
        assert_eq!(
            check_method_call(&t, "incAndCount", &[]),
            Ok(Some(FieldType::Number))
        );
    }

    #[test]
    fn width_subtyping_forgets_fields() {
        let wide_x = counter_nc();
        let wide_y = ObjType::concrete(row(&[("inc", inc_sig())]), row(&[("y", FieldType::Number)]));
        let narrow = ObjType::concrete(row(&[("inc", inc_sig())]), Row::new());
        assert!(subtype_np(&wide_x, &narrow));
        assert!(subtype_np(&wide_y, &narrow));
        assert!(!subtype_np(&narrow, &wide_x));
    }

    #[test]
    fn writable_entries_are_invariant() {
        let num = ObjType::concrete(Row::new(), row(&[("x", FieldType::Number)]));
        let meth = ObjType::concrete(Row::new(), row(&[("x", inc_sig())]));
        assert!(!subtype_np(&num, &meth));
        assert!(!subtype_np(&meth, &num));
    }

    #[test]
    fn attach_within_bound_succeeds() {
        let proto = prototype_type();
        let assumed = ObjType::concrete(Row::new(), row(&[("x", FieldType::Number)]));
        let out = attach_method(&proto, "inc", &assumed, &inc_sig()).unwrap();
        assert!(out.r.contains_key("inc"));
    }

    #[test]
    fn attach_exceeding_bound_fails() {
        let proto = prototype_type();
        let assumed = ObjType::concrete(Row::new(), row(&[("q", FieldType::Number)]));
        let err = attach_method(&proto, "reset", &assumed, &inc_sig()).unwrap_err();
        match err {
            ProtoError::AttachExceeds { excess } => assert_eq!(excess, ["write q"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attach_pure_method_always_fits() {
        let proto = prototype_type();
        let assumed = ObjType::concrete(Row::new(), Row::new());
        assert!(attach_method(&proto, "noop", &assumed, &inc_sig()).is_ok());
    }

    fn counter_effect(backing: &str) -> ObjType {
        let sig = FieldType::Method(MethodType::with_effect(
            vec![],
            None,
            BTreeSet::from([backing.to_string()]),
        ));
        ObjType::concrete(row(&[("inc", sig)]), row(&[(backing, FieldType::Number)]))
    }

    #[test]
    fn effect_lub_of_distinct_backing_fields_is_not_callable() {
        let f = counter_effect("x");
        let g = counter_effect("y");
        let out = lub_effect_variant(&f, &g);
        assert_eq!(out.not_callable, ["inc"]);
        assert!(out.lub.w.is_empty());
        let FieldType::Method(mt) = &out.lub.r["inc"] else { panic!() };
        let eff: Vec<&str> = mt.wr_eff.as_ref().unwrap().iter().map(String::as_str).collect();
        assert_eq!(eff, ["x", "y"]);
        // and calling through the bound indeed fails the subset check
        let err = check_method_call(&out.lub, "inc", &[]).unwrap_err();
        assert!(matches!(err, ProtoError::NotCallable { .. }));
    }

    #[test]
    fn effect_lub_is_idempotent_and_preserves_callability() {
        let f = counter_effect("x");
        let out = lub_effect_variant(&f, &f);
        assert_eq!(out.lub, f);
        assert!(out.not_callable.is_empty());
        assert!(check_method_call(&out.lub, "inc", &[]).is_ok());
    }
}
