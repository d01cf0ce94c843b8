#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "riccibench/report.hpp"

namespace rb {

// Graded commutative algebra over Z/2 with a monomial basis: the product of two basis
// elements is another basis element or zero.
struct Mod2Ring {
    struct Basis {
        std::string name;
        int degree = 0;
    };
    std::string name;
    std::vector<Basis> basis;            // basis[0] is the unit
    std::vector<std::vector<int>> mult;  // basis index of the product, -1 for zero
    int top_degree = 0;
    int fundamental = -1;               // basis index dual to the fundamental class
    std::vector<std::uint8_t> sw;       // total Stiefel-Whitney class, one bit per basis element

    int index(const std::string& basis_name) const;  // -1 when absent
    std::size_t size() const { return basis.size(); }
};

using Bits = std::vector<std::uint8_t>;

Bits add(const Bits& x, const Bits& y);
Bits multiply(const Mod2Ring& R, const Bits& x, const Bits& y);
Bits component(const Mod2Ring& R, const Bits& x, int degree);
std::string format(const Mod2Ring& R, const Bits& x);  // "1 + a + a*", "0" when empty

// b in degree 2, b^{n+1} = 0, w = (1 + b)^{n+1}
Mod2Ring ring_cpn(int n);
// a^k in degree 2k for k < 2i, (a^k)* in degree 2(2i - k) + 1, fundamental class (a^0)*
Mod2Ring ring_wi(int i);
// Kunneth product; the total class is the product of the pulled back classes
Mod2Ring product(const Mod2Ring& A, const Mod2Ring& B);
Mod2Ring product(const std::vector<Mod2Ring>& factors);

// the same class computed basis pair by basis pair from the factor classes
Bits kunneth_sw(const Mod2Ring& A, const Mod2Ring& B);

bool is_associative(const Mod2Ring& R);
bool is_commutative(const Mod2Ring& R);
bool is_graded(const Mod2Ring& R);

// w_k^e factor of a Stiefel-Whitney monomial
struct SWPower {
    int k = 0;
    int exponent = 1;
};

// evaluation of the monomial on the fundamental class; throws on a degree mismatch
int sw_number(const Mod2Ring& R, const std::vector<SWPower>& monomial);
int sw_number(const std::vector<Mod2Ring>& factors, const std::vector<SWPower>& monomial);
std::string format(const std::vector<SWPower>& monomial);  // "w3w2^3"

int mod2_rank(std::vector<std::vector<int>> rows);

struct SWTable {
    std::vector<std::string> manifolds;
    std::vector<std::string> numbers;
    std::vector<std::vector<int>> values;
    int rank = 0;
};

// (w3w2^3, w7w2) on W2 and W1 x CP^2
SWTable omega9_generator_table();
json to_json(const SWTable& t);
std::string format_table(const SWTable& t);

}  // namespace rb
