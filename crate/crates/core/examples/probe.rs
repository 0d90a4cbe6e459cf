use hecke_dynamics::binv::{reference_instance, write_instance};
fn main() {
    let data = reference_instance();
    std::fs::write("instances/d2.txt", write_instance(&data)).unwrap();
    println!("wrote instances/d2.txt (degree {})", data.degree());
}
