#include "maglap/field_expr.hpp"

#include <cctype>
#include <cstdlib>

namespace maglap {

struct FieldExpr::Node {
    enum Kind { Const, Coord, Add, Sub, Mul, Neg, Cos, Sin } kind;
    double value = 0.0;
    int coord = 0;
    std::shared_ptr<const Node> a, b;

    double eval(const std::vector<double>& x) const {
        switch (kind) {
            case Const: return value;
            case Coord: return x[coord];
            case Add: return a->eval(x) + b->eval(x);
            case Sub: return a->eval(x) - b->eval(x);
            case Mul: return a->eval(x) * b->eval(x);
            case Neg: return -a->eval(x);
            case Cos: return std::cos(a->eval(x));
            case Sin: return std::sin(a->eval(x));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const FieldExpr::Node>;

class Parser {
public:
    Parser(const std::string& s, int dim) : s_(s), dim_(dim) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    NodePtr make(FieldExpr::Node n) { return std::make_shared<FieldExpr::Node>(std::move(n)); }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            if (accept('+'))
                lhs = make({FieldExpr::Node::Add, 0, 0, lhs, term()});
            else if (accept('-'))
                lhs = make({FieldExpr::Node::Sub, 0, 0, lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            skip_ws();
            if (accept('*'))
                lhs = make({FieldExpr::Node::Mul, 0, 0, lhs, factor()});
            else
                return lhs;
        }
    }

    NodePtr factor() {
        skip_ws();
        if (accept('-')) return make({FieldExpr::Node::Neg, 0, 0, factor(), nullptr});
        if (accept('(')) {
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            return number();
        if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) return ident();
        fail("expected factor");
        return nullptr;
    }

    NodePtr number() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        char* end = nullptr;
        std::string tok = s_.substr(start, pos_ - start);
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') fail("bad number '" + tok + "'");
        return make({FieldExpr::Node::Const, v, 0, nullptr, nullptr});
    }

    NodePtr ident() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(start, pos_ - start);
        if (name == "pi") return make({FieldExpr::Node::Const, kPi, 0, nullptr, nullptr});
        if (name == "cos" || name == "sin") {
            expect('(');
            NodePtr arg = expr();
            expect(')');
            return make({name == "cos" ? FieldExpr::Node::Cos : FieldExpr::Node::Sin, 0, 0, arg,
                         nullptr});
        }
        int coord = -1;
        if (name == "x") coord = 0;
        else if (name == "y") coord = 1;
        else if (name.size() == 2 && name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1])))
            coord = name[1] - '0';
        if (coord >= 0) {
            if (coord >= dim_) fail("coordinate " + name + " out of range for dimension");
            return make({FieldExpr::Node::Coord, 0, coord, nullptr, nullptr});
        }
        fail("unknown identifier '" + name + "'");
        return nullptr;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    [[noreturn]] void fail(const std::string& why) {
        throw Error("ExprParse", why + " at offset " + std::to_string(pos_) + " in \"" + s_ + "\"");
    }

    const std::string& s_;
    int dim_;
    size_t pos_ = 0;
};

}  // namespace

FieldExpr FieldExpr::parse(const std::string& text, int dim) {
    FieldExpr e;
    e.root_ = Parser(text, dim).run();
    e.text_ = text;
    e.dim_ = dim;
    return e;
}

double FieldExpr::eval(const std::vector<double>& coords) const {
    if (!root_) throw Error("ExprParse", "empty expression");
    if (static_cast<int>(coords.size()) < dim_)
        throw Error("BadArgument", "coordinate vector too short");
    return root_->eval(coords);
}

}  // namespace maglap
