#pragma once

// delta_D and Delta from a finite group acting on the irreducible components
// of a fibre, each component weighted by its multiplicity.

#include <istream>
#include <string>
#include <vector>

#include "fibstat/arith.hpp"

namespace fibstat {

using Permutation = std::vector<int>;  // image notation: i -> perm[i]

class ComponentAction {
public:
    /// `elements` is the full element list of the acting group, each given by
    /// its image in Sym(components). Repeated images are allowed when the
    /// action factors through a quotient; every image must then occur equally
    /// often. Throws Precondition on a malformed group.
    ComponentAction(std::vector<Permutation> elements, std::vector<int> multiplicities);

    std::size_t group_size() const noexcept { return elements_.size(); }
    std::size_t components() const noexcept { return multiplicities_.size(); }
    const std::vector<Permutation>& elements() const noexcept { return elements_; }
    const std::vector<int>& multiplicities() const noexcept { return multiplicities_; }

private:
    std::vector<Permutation> elements_;
    std::vector<int> multiplicities_;
};

/// Proportion of group elements fixing at least one multiplicity-1 component.
Rational delta(const ComponentAction& action);
/// Sum of (1 - delta) over the divisors.
Rational delta_total(const std::vector<ComponentAction>& divisors);

/// Parses one-line cycle notation such as "(0 1)(2 3)" or "()" on n points.
Permutation parse_cycles(const std::string& text, int n);

struct NamedAction {
    std::string name;
    ComponentAction action;
};

/// Reads an action document:
///
///   # comment
///   divisor <name>
///   components <m>
///   multiplicity <m_0> ... <m_{m-1}>     (optional, default all 1)
///   element (0 1)(2 3)                   one line per group element, cycles
///   element [1 0 3 2]                    or images
///   end
///
/// Components are numbered from 0.
std::vector<NamedAction> parse_action_document(std::istream& in);
std::vector<NamedAction> load_action_document(const std::string& path);

}  // namespace fibstat
