#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optomech {

/// Bad input: missing/non-numeric/out-of-range configuration, malformed
/// sweep specification, unknown override key. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class PhysicsErrorCode {
    degenerate_coupling,
    no_real_root,
    linearization_refused,
    static_instability,
    parametric_instability,
    quadrature_not_converged,
    step_underflow,
};

constexpr std::string_view to_string(PhysicsErrorCode code) noexcept {
    switch (code) {
        case PhysicsErrorCode::degenerate_coupling: return "degenerate_coupling";
        case PhysicsErrorCode::no_real_root: return "no_real_root";
        case PhysicsErrorCode::linearization_refused: return "linearization_refused";
        case PhysicsErrorCode::static_instability: return "static_instability";
        case PhysicsErrorCode::parametric_instability: return "parametric_instability";
        case PhysicsErrorCode::quadrature_not_converged: return "quadrature_not_converged";
        case PhysicsErrorCode::step_underflow: return "step_underflow";
    }
    return "unknown";
}

/// The model has no meaningful answer at this point (instability, loss of
/// the stable root, non-convergence). Maps to CLI exit code 2.
class PhysicsError : public std::runtime_error {
public:
    PhysicsError(PhysicsErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] PhysicsErrorCode code() const noexcept { return code_; }

private:
    PhysicsErrorCode code_;
};

}  // namespace optomech
