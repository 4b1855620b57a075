fn main() { println!("{}", parcl_core::placeholder()); }
