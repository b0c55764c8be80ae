use certgame::boolfn::{zoo, ZooSpec};
fn main() {
    let f = zoo(ZooSpec::Parity(2)).unwrap();
    eprintln!("solving cg_ns(PARITY2)...");
    let rep = certgame::games::cg_ns(&f).unwrap();
    eprintln!("value = {:?}", rep.lower.as_f64());
}
