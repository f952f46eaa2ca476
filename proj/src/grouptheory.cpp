#include "fibstat/grouptheory.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fibstat {

namespace {

Permutation compose(const Permutation& g, const Permutation& h)
{
    // (g h)(i) = g(h(i))
    Permutation out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = g[h[i]];
    return out;
}

}  // namespace

ComponentAction::ComponentAction(std::vector<Permutation> elements, std::vector<int> multiplicities)
    : elements_(std::move(elements)), multiplicities_(std::move(multiplicities))
{
    const int m = static_cast<int>(multiplicities_.size());
    require(m >= 1, "action needs at least one component");
    require(!elements_.empty(), "action needs at least one group element");
    for (int mult : multiplicities_) require(mult >= 1, "multiplicities must be positive");

    std::map<Permutation, std::size_t> image_count;
    for (const auto& g : elements_) {
        require(static_cast<int>(g.size()) == m, "group element has the wrong number of points");
        std::vector<bool> seen(m, false);
        for (int i = 0; i < m; ++i) {
            require(g[i] >= 0 && g[i] < m && !seen[g[i]], "group element is not a permutation");
            seen[g[i]] = true;
            require(multiplicities_[g[i]] == multiplicities_[i], "group element does not preserve multiplicities");
        }
        ++image_count[g];
    }
    Permutation identity(m);
    for (int i = 0; i < m; ++i) identity[i] = i;
    require(image_count.count(identity) > 0, "group has no identity element");
    const std::size_t fibre = image_count.begin()->second;
    for (const auto& [g, c] : image_count) {
        require(c == fibre, "element list is not a group: images occur with unequal multiplicity");
        for (const auto& [h, c2] : image_count) {
            require(image_count.count(compose(g, h)) > 0, "element list is not closed under composition");
        }
    }
}

Rational delta(const ComponentAction& action)
{
    const auto& mult = action.multiplicities();
    i64 fixing = 0;
    for (const auto& g : action.elements()) {
        bool fixes = false;
        for (std::size_t i = 0; i < g.size() && !fixes; ++i) fixes = mult[i] == 1 && g[i] == static_cast<int>(i);
        fixing += fixes;
    }
    return Rational(fixing, static_cast<i64>(action.group_size()));
}

Rational delta_total(const std::vector<ComponentAction>& divisors)
{
    Rational total(0);
    for (const auto& d : divisors) total += Rational(1) - delta(d);
    return total;
}

Permutation parse_cycles(const std::string& text, int n)
{
    Permutation perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::set<int> used;
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    skip();
    require(pos < text.size(), "empty cycle notation");
    while (pos < text.size()) {
        require(text[pos] == '(', "malformed cycle notation '" + text + "'");
        ++pos;
        std::vector<int> cycle;
        for (;;) {
            skip();
            require(pos < text.size(), "unterminated cycle in '" + text + "'");
            if (text[pos] == ')') {
                ++pos;
                break;
            }
            if (text[pos] == ',') {
                ++pos;
                continue;
            }
            std::size_t used_chars = 0;
            int v = 0;
            try {
                v = std::stoi(text.substr(pos), &used_chars);
            } catch (const std::logic_error&) {
                fail(Error::Kind::Precondition, "malformed cycle notation '" + text + "'");
            }
            pos += used_chars;
            require(v >= 0 && v < n, "cycle entry out of range in '" + text + "'");
            require(used.insert(v).second, "point repeated in cycle notation '" + text + "'");
            cycle.push_back(v);
        }
        for (std::size_t i = 0; i < cycle.size(); ++i) perm[cycle[i]] = cycle[(i + 1) % cycle.size()];
        skip();
    }
    return perm;
}

namespace {

Permutation parse_images(const std::string& text, int n)
{
    require(text.size() >= 2 && text.front() == '[' && text.back() == ']', "malformed image notation '" + text + "'");
    std::istringstream in(text.substr(1, text.size() - 2));
    Permutation perm;
    std::string tok;
    while (in >> tok) {
        if (tok == ",") continue;
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        try {
            perm.push_back(std::stoi(tok));
        } catch (const std::logic_error&) {
            fail(Error::Kind::Precondition, "malformed image notation '" + text + "'");
        }
    }
    require(static_cast<int>(perm.size()) == n, "image notation has the wrong length: '" + text + "'");
    return perm;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<NamedAction> parse_action_document(std::istream& in)
{
    std::vector<NamedAction> out;
    std::string line;
    int lineno = 0;
    bool open = false;
    std::string name;
    int m = 0;
    std::vector<int> mult;
    std::vector<Permutation> elements;

    auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream words(line);
        std::string key;
        words >> key;
        std::string rest;
        std::getline(words, rest);
        rest = trim(rest);

        if (key == "divisor") {
            require(!open, "divisor block not closed before a new one" + where());
            require(!rest.empty(), "divisor needs a name" + where());
            open = true;
            name = rest;
            m = 0;
            mult.clear();
            elements.clear();
        } else if (!open) {
            fail(Error::Kind::Precondition, "'" + key + "' outside a divisor block" + where());
        } else if (key == "components") {
            try {
                m = std::stoi(rest);
            } catch (const std::logic_error&) {
                fail(Error::Kind::Precondition, "malformed component count" + where());
            }
            require(m >= 1, "component count must be positive" + where());
        } else if (key == "multiplicity") {
            std::istringstream vals(rest);
            int v;
            mult.clear();
            while (vals >> v) mult.push_back(v);
            require(vals.eof(), "malformed multiplicity list" + where());
        } else if (key == "element") {
            require(m >= 1, "'components' must precede elements" + where());
            require(!rest.empty(), "empty element" + where());
            elements.push_back(rest.front() == '[' ? parse_images(rest, m) : parse_cycles(rest, m));
        } else if (key == "end") {
            if (mult.empty()) mult.assign(m, 1);
            require(static_cast<int>(mult.size()) == m, "multiplicity list length differs from components" + where());
            out.push_back({name, ComponentAction(elements, mult)});
            open = false;
        } else {
            fail(Error::Kind::Precondition, "unknown keyword '" + key + "'" + where());
        }
    }
    require(!open, "unterminated divisor block '" + name + "'");
    return out;
}

std::vector<NamedAction> load_action_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(Error::Kind::Io, "cannot open action document " + path);
    return parse_action_document(in);
}

}  // namespace fibstat
