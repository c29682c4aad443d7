#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stackroute {

/// One-byte protocol identifier. Display names live in ProtocolNames;
/// the identifier itself is what travels on the wire.
struct ProtocolId {
    std::uint8_t value = 0;

    auto operator<=>(const ProtocolId&) const = default;
};

enum class FunctionKind : std::uint8_t {
    Conversion = 0,     // (x -> y): rewrite the top protocol
    Encapsulation = 1,  // (x -> xy): nest x inside y, pushing y
    Decapsulation = 2,  // ~(x -> xy): pop y, exposing x again
};

/// An adaptation function. The (x, y) pair is shared between an
/// encapsulation and its matching decapsulation; Conversion(x, x) is
/// plain retransmission.
struct AdaptationFunction {
    FunctionKind kind = FunctionKind::Conversion;
    ProtocolId x;
    ProtocolId y;

    // Canonical order: kind (conv < enc < dec), then x, then y.
    auto operator<=>(const AdaptationFunction&) const = default;

    static AdaptationFunction conversion(ProtocolId x, ProtocolId y) {
        return {FunctionKind::Conversion, x, y};
    }
    static AdaptationFunction encapsulation(ProtocolId x, ProtocolId y) {
        return {FunctionKind::Encapsulation, x, y};
    }
    static AdaptationFunction decapsulation(ProtocolId x, ProtocolId y) {
        return {FunctionKind::Decapsulation, x, y};
    }

    bool is_identity_conversion() const {
        return kind == FunctionKind::Conversion && x == y;
    }
};

/// A protocol stack, bottom-to-top. Height-0 stacks exist only as
/// transient values; routing keys and messages always carry height >= 1.
/// The "forbidden" result of an inapplicable function is represented by
/// an empty optional at the call sites, never by a sentinel stack.
class ProtocolStack {
  public:
    ProtocolStack() = default;
    explicit ProtocolStack(std::vector<ProtocolId> items) : items_(std::move(items)) {}

    static ProtocolStack single(ProtocolId p) { return ProtocolStack({p}); }

    std::size_t height() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    /// pre: height() >= 1
    ProtocolId top() const { return items_.back(); }
    /// pre: height() >= 2
    ProtocolId below_top() const { return items_[items_.size() - 2]; }

    /// index 0 = bottom
    ProtocolId at(std::size_t i) const { return items_[i]; }
    const std::vector<ProtocolId>& items() const { return items_; }

    auto operator<=>(const ProtocolStack&) const = default;

  private:
    friend std::optional<ProtocolStack> apply(const AdaptationFunction&, const ProtocolStack&);

    std::vector<ProtocolId> items_;
};

/// Applies f to a stack. Returns nullopt (the forbidden stack) when f
/// cannot handle the given top of stack.
std::optional<ProtocolStack> apply(const AdaptationFunction& f, const ProtocolStack& stack);

/// Forbidden absorbs: apply(f, nullopt) == nullopt for every f.
std::optional<ProtocolStack> apply(const AdaptationFunction& f,
                                   const std::optional<ProtocolStack>& stack);

/// The inverse function: conversions swap arguments, encapsulation and
/// decapsulation swap kinds. reverse(reverse(f)) == f.
AdaptationFunction reverse(const AdaptationFunction& f);

/// The stack sequence induced by a function sequence whose first element
/// is an identity conversion (x -> x), i.e. plain emission of x. Returns
/// one stack per function. nullopt if the first function is not an
/// identity conversion or any application is forbidden.
/// Throws std::invalid_argument on an empty sequence.
std::optional<std::vector<ProtocolStack>> stack_trace(
    std::span<const AdaptationFunction> functions);

/// Display names for protocol identifiers. When no name is registered the
/// fallback is 'a' + id for small ids, "#<id>" beyond.
struct ProtocolNames {
    std::vector<std::string> names;  // index = protocol id

    std::size_t count() const { return names.size(); }
    std::string name_of(ProtocolId p) const;
    std::optional<ProtocolId> find(std::string_view name) const;
};

/// Bottom-to-top concatenation of protocol names, e.g. "abab".
std::string to_string(const ProtocolStack& stack, const ProtocolNames& names = {});

/// "a->b" (conversion), "a->ab" (encapsulation), "~(a->ab)" (decapsulation).
std::string to_string(const AdaptationFunction& f, const ProtocolNames& names = {});

/// Parses the rendering produced by to_string. Greedy longest-name match;
/// throws std::invalid_argument on unknown names or malformed input.
ProtocolStack parse_stack(std::string_view text, const ProtocolNames& names);
AdaptationFunction parse_function(std::string_view text, const ProtocolNames& names);

}  // namespace stackroute
