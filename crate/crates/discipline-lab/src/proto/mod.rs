//! Structural type checking for a prototype-based object calculus with
//! fixed object layout: split `{r | w}` object types, method-accessed rows,
//! prototypal vs. concrete (`NC`) types, and an effect-variant method-call
//! check kept as a comparison point.

pub mod ops;
pub mod parser;
pub mod program;
pub mod types;

pub use ops::{
    attach_method, check_field_read, check_field_write, check_method_call, concretize,
    lub_effect_variant, subtype_np, EffectLub, ProtoError,
};
pub use parser::{parse_proto, parse_proto_named, PParseError, ProtoProgram};
pub use program::{
    check_proto_program, check_proto_program_effect, infer_constructors, InferredCtor, ProtoMode,
};
pub use types::{field_subtype, row, FieldType, MAcc, MethodType, ObjType, Row};
