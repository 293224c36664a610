fn main() {
    println!("bolza");
}
