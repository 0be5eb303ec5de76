use discipline_lab::kernel::parse;
fn main() {
    let base_src = "ui class Label { method poke(self: writable): writable Label { skip } } \
         class Data { field next: writable Data; } \
         let label: writable Label { let d: writable Data { \
           spawn { skip; e0 = d } \
         } }";
    let padded_src = base_src.replace("spawn {", "spawn { let pad: writable Label {").to_string() + " ";
    let padded_src = padded_src.replacen("} } }", "} } } }", 1);
    println!("{padded_src}");
    match parse(&padded_src) {
        Ok(_) => println!("PARSES"),
        Err(e) => println!("FAILS: {e}"),
    }
}
