#pragma once

#include <string>
#include <vector>

#include "ipdb/fact.hpp"
#include "ipdb/formula.hpp"
#include "ipdb/instance.hpp"

namespace ipdb {

/// phi_R(x_1, ..., x_k) defining the target relation R.
struct ViewDefinition {
    std::string relation;
    std::vector<std::string> variables;
    Formula formula;
};

/// An FO view: one defining formula per relation of the target schema.
class View {
  public:
    /// Every target relation needs exactly one definition whose variable
    /// list matches its arity and names all free variables of the formula.
    View(Schema target, std::vector<ViewDefinition> definitions);

    const Schema& target() const noexcept { return target_; }
    const std::vector<ViewDefinition>& definitions() const noexcept { return definitions_; }

    /// V(D); throws InfiniteAnswer when some definition has infinitely
    /// many answers on d.
    Instance apply(const Instance& d, const Universe& u) const;

  private:
    Schema target_;
    std::vector<ViewDefinition> definitions_;
};

/// The image measure P'({D'}) = P(V^{-1}(D')) over the target schema.
FiniteDiscretePDB view_pushforward(const FiniteDiscretePDB& p, const View& v);

} // namespace ipdb
