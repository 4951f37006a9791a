#pragma once
// Closed-form scalar fields on the torus [0,1)^{2n} from a small expression
// whitelist: decimal constants, pi, coordinates x0..x3 (x,y aliases for
// x0,x1), unary minus, + - *, parentheses, cos(...) and sin(...).
// Division is deliberately not supported; coefficients are plain constants.

#include <memory>
#include <string>
#include <vector>

#include "maglap/common.hpp"

namespace maglap {

class FieldExpr {
public:
    // Throws Error("ExprParse", ...) on malformed input or non-whitelisted symbols.
    static FieldExpr parse(const std::string& text, int dim);

    double eval(const std::vector<double>& coords) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    int dim_ = 0;
};

}  // namespace maglap
