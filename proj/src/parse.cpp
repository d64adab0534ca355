#include "inertia/parse.hpp"

#include <cctype>
#include <stdexcept>

namespace inertia {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return i < s.size() ? s[i] : '\0';
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool eat_word(const std::string& w) {
        skip_ws();
        if (s.compare(i, w.size(), w) != 0) return false;
        std::size_t end = i + w.size();
        if (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_' ||
                               s[end] == '-'))
            return false;
        i = end;
        return true;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("parse error at offset " + std::to_string(i) + ": " + what);
    }

    Int integer() {
        skip_ws();
        std::size_t start = i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        std::size_t digits = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == digits) fail("expected an integer");
        return Int(s.substr(start, i - start));
    }
    long small_int() {
        Int v = integer();
        if (v < -1000000 || v > 1000000) fail("value out of range");
        return static_cast<long>(v);
    }
    Rat rational() {
        Int n = integer();
        if (eat('/')) {
            Int d = integer();
            if (d == 0) fail("zero denominator");
            return Rat(n, d);
        }
        return Rat(n);
    }
};

Int prime_at(Cursor& c) {
    Int p = c.integer();
    if (!is_prime(p)) c.fail(p.str() + " is not a prime");
    return p;
}

Multiplicity parse_mult(Cursor& c) {
    if (!c.eat('^')) return Multiplicity::finite(1);
    if (c.eat_word("w") || c.eat_word("omega")) return Multiplicity::w();
    long n = c.small_int();
    if (n < 1) c.fail("multiplicity must be positive");
    return Multiplicity::finite(n);
}

Atom parse_atom(Cursor& c) {
    if (c.eat_word("Z")) {
        if (!c.eat('(')) return Atom::localized(PrimeSet());  // the integers
        Int p = c.integer();
        long e = 1;
        if (!is_prime(p)) {
            // Z(n) for a prime power n is shorthand for Z(p^e).
            auto f = factor(p);
            if (f.size() != 1 || p <= 1) c.fail(p.str() + " is not a prime power");
            e = valuation(p, f[0]);
            p = f[0];
        }
        bool inf = false;
        if (c.eat('^')) {
            if (e != 1) c.fail("exponent given twice");
            if (c.eat_word("inf") || c.eat_word("infinity")) {
                inf = true;
            } else {
                e = c.small_int();
                if (e < 1) c.fail("exponent must be positive");
            }
        }
        c.expect(')');
        return inf ? Atom::prufer(p) : Atom::cyclic(p, e);
    }
    if (c.eat_word("Q")) {
        if (!c.eat('[')) return Atom::localized(PrimeSet::all());
        std::set<Int> primes;
        do {
            primes.insert(prime_at(c));
        } while (c.eat(','));
        c.expect(']');
        return Atom::localized(PrimeSet(std::move(primes)));
    }
    c.fail("expected a group atom (Z, Z(p^e), Z(p^inf), Q, Q[..])");
}

GroupDescriptor parse_fg(Cursor& c) {
    c.expect('{');
    std::vector<std::vector<Int>> rows;
    if (c.peek() != '}') {
        do {
            std::vector<Int> row;
            while (c.peek() != ';' && c.peek() != '}') {
                row.push_back(c.integer());
                c.eat(',');
            }
            rows.push_back(std::move(row));
        } while (c.eat(';'));
    }
    c.expect('}');
    if (rows.empty()) c.fail("fg{} needs at least one relation row");
    std::size_t cols = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != cols) c.fail("fg relation rows must have equal length");
    Mat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return GroupDescriptor::from_presentation(m);
}

std::vector<std::size_t> parse_slot_list(Cursor& c, const GroupDescriptor& g) {
    c.eat_word("slots");
    c.eat('=');
    std::vector<std::size_t> out;
    do {
        long s = c.small_int();
        if (s < 1 || static_cast<std::size_t>(s) > g.slots.size())
            c.fail("slot index out of range (slots are 1-based)");
        out.push_back(static_cast<std::size_t>(s - 1));
    } while (c.eat(','));
    return out;
}

CoordKey parse_coord(Cursor& c, const GroupDescriptor& g) {
    c.expect('(');
    long s = c.small_int();
    if (s < 1 || static_cast<std::size_t>(s) > g.slots.size())
        c.fail("slot index out of range (slots are 1-based)");
    c.expect(',');
    long copy = c.small_int();
    if (copy < 0) c.fail("copy index must be nonnegative");
    c.expect(')');
    return CoordKey{static_cast<std::size_t>(s - 1), copy};
}

Scalar parse_scalar(Cursor& c) {
    if (c.eat_word("local")) {
        c.expect('(');
        Int p = prime_at(c);
        c.expect(':');
        Rat r = c.rational();
        c.expect(')');
        return Scalar(std::move(r), std::move(p));
    }
    return Scalar(c.rational());
}

void parse_blocks(Cursor& c, const GroupDescriptor& g, Endomorphism& phi) {
    c.expect('{');
    if (c.peek() != '}') {
        do {
            std::vector<std::size_t> slots = parse_slot_list(c, g);
            c.expect(':');
            Scalar sc = parse_scalar(c);
            phi.blocks.push_back({{slots.begin(), slots.end()}, std::move(sc)});
        } while (c.eat(';'));
    }
    c.expect('}');
}

void parse_matrix(Cursor& c, const GroupDescriptor& g, Endomorphism& phi) {
    c.expect('{');
    if (c.peek() != '}') {
        do {
            CoordKey src = parse_coord(c, g);
            c.expect('-');
            c.expect('>');
            CoordKey dst = parse_coord(c, g);
            c.expect(':');
            phi.matrix.entries[{src, dst}] = c.rational();
        } while (c.eat(';'));
    }
    c.expect('}');
}

void parse_finitary(Cursor& c, const GroupDescriptor& g, Endomorphism& phi) {
    c.expect('{');
    FinitaryContribution f;
    do {
        if (c.eat_word("mod")) {
            c.eat('=');
            f.modulus = c.integer();
        } else if (c.eat_word("w")) {
            c.eat('=');
            do {
                CoordKey k = parse_coord(c, g);
                c.expect(':');
                f.weights[k] = c.rational();
            } while (c.eat(','));
        } else if (c.eat_word("target")) {
            c.eat('=');
            do {
                CoordKey k = parse_coord(c, g);
                c.expect(':');
                f.target.coords[k] = c.rational();
            } while (c.eat(','));
        } else {
            c.fail("expected mod=, w= or target= in finitary{...}");
        }
    } while (c.eat(';'));
    c.expect('}');
    f.target = canonicalize(g, std::move(f.target));
    phi.finitary.contributions.push_back(std::move(f));
}

}  // namespace

GroupDescriptor parse_group(const std::string& text) {
    Cursor c{text};
    if (c.eat_word("fg")) {
        GroupDescriptor g = parse_fg(c);
        if (!c.done()) c.fail("fg{...} must be the whole group spec");
        return g;
    }
    std::vector<Slot> slots;
    do {
        Atom a = parse_atom(c);
        Multiplicity m = parse_mult(c);
        slots.push_back({std::move(a), m});
    } while (c.eat('+'));
    if (!c.done()) c.fail("trailing input after group spec");
    return GroupDescriptor::from_slots(std::move(slots));
}

Endomorphism parse_endo(const std::string& text, const GroupDescriptor& g) {
    Cursor c{text};
    if (c.eat_word("mult")) {
        Rat r = c.rational();
        if (!c.done()) c.fail("trailing input after mult");
        return multiplication(g, r);
    }
    if (c.eat_word("id")) {
        if (!c.done()) c.fail("trailing input after id");
        return multiplication(g, Rat(1));
    }
    if (c.eat_word("zero")) {
        if (!c.done()) c.fail("trailing input after zero");
        return zero_endo(g);
    }
    Endomorphism phi = zero_endo(g);
    do {
        if (c.eat_word("blocks") || c.eat_word("block"))
            parse_blocks(c, g, phi);
        else if (c.eat_word("matrix"))
            parse_matrix(c, g, phi);
        else if (c.eat_word("finitary"))
            parse_finitary(c, g, phi);
        else
            c.fail("expected mult, id, zero, blocks{...}, matrix{...} or finitary{...}");
    } while (c.eat('+'));
    if (!c.done()) c.fail("trailing input after endomorphism spec");
    WellDefined wd = is_well_defined(phi);
    if (!wd) throw std::invalid_argument("endomorphism ill-defined: " + wd.diagnostic);
    return phi;
}

Rat parse_rat(const std::string& text) {
    Cursor c{text};
    Rat r = c.rational();
    if (!c.done()) c.fail("trailing input after rational");
    return r;
}

}  // namespace inertia
