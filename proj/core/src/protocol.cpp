#include "stackroute/protocol.hpp"

#include <stdexcept>

namespace stackroute {

std::optional<ProtocolStack> apply(const AdaptationFunction& f, const ProtocolStack& stack) {
    if (stack.empty()) {
        return std::nullopt;
    }
    switch (f.kind) {
        case FunctionKind::Conversion:
            if (stack.top() == f.x) {
                ProtocolStack out = stack;
                out.items_.back() = f.y;
                return out;
            }
            return std::nullopt;
        case FunctionKind::Encapsulation:
            if (stack.top() == f.x) {
                ProtocolStack out = stack;
                out.items_.push_back(f.y);
                return out;
            }
            return std::nullopt;
        case FunctionKind::Decapsulation:
            if (stack.height() >= 2 && stack.top() == f.y && stack.below_top() == f.x) {
                ProtocolStack out = stack;
                out.items_.pop_back();
                return out;
            }
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<ProtocolStack> apply(const AdaptationFunction& f,
                                   const std::optional<ProtocolStack>& stack) {
    if (!stack) {
        return std::nullopt;
    }
    return apply(f, *stack);
}

AdaptationFunction reverse(const AdaptationFunction& f) {
    switch (f.kind) {
        case FunctionKind::Conversion:
            return AdaptationFunction::conversion(f.y, f.x);
        case FunctionKind::Encapsulation:
            return AdaptationFunction::decapsulation(f.x, f.y);
        case FunctionKind::Decapsulation:
            return AdaptationFunction::encapsulation(f.x, f.y);
    }
    return f;
}

std::optional<std::vector<ProtocolStack>> stack_trace(
    std::span<const AdaptationFunction> functions) {
    if (functions.empty()) {
        throw std::invalid_argument("stack_trace: empty function sequence");
    }
    if (!functions.front().is_identity_conversion()) {
        return std::nullopt;
    }
    std::vector<ProtocolStack> trace;
    trace.reserve(functions.size());
    trace.push_back(ProtocolStack::single(functions.front().x));
    for (std::size_t i = 1; i < functions.size(); ++i) {
        auto next = apply(functions[i], trace.back());
        if (!next) {
            return std::nullopt;
        }
        trace.push_back(std::move(*next));
    }
    return trace;
}

std::string ProtocolNames::name_of(ProtocolId p) const {
    if (p.value < names.size() && !names[p.value].empty()) {
        return names[p.value];
    }
    if (p.value < 26) {
        return std::string(1, static_cast<char>('a' + p.value));
    }
    return "#" + std::to_string(static_cast<unsigned>(p.value));
}

std::optional<ProtocolId> ProtocolNames::find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return ProtocolId{static_cast<std::uint8_t>(i)};
        }
    }
    // fall back to the single-letter default alphabet
    if (names.empty() && name.size() == 1 && name[0] >= 'a' && name[0] <= 'z') {
        return ProtocolId{static_cast<std::uint8_t>(name[0] - 'a')};
    }
    return std::nullopt;
}

std::string to_string(const ProtocolStack& stack, const ProtocolNames& names) {
    std::string out;
    for (ProtocolId p : stack.items()) {
        out += names.name_of(p);
    }
    return out;
}

std::string to_string(const AdaptationFunction& f, const ProtocolNames& names) {
    const std::string x = names.name_of(f.x);
    const std::string y = names.name_of(f.y);
    switch (f.kind) {
        case FunctionKind::Conversion:
            return x + "->" + y;
        case FunctionKind::Encapsulation:
            return x + "->" + x + y;
        case FunctionKind::Decapsulation:
            return "~(" + x + "->" + x + y + ")";
    }
    return {};
}

namespace {

// Longest-match lookup of a protocol name at the front of `text`.
std::optional<std::pair<ProtocolId, std::size_t>> match_protocol(std::string_view text,
                                                                 const ProtocolNames& names) {
    std::optional<std::pair<ProtocolId, std::size_t>> best;
    for (std::size_t i = 0; i < names.names.size(); ++i) {
        const std::string& n = names.names[i];
        if (!n.empty() && text.substr(0, n.size()) == n) {
            if (!best || n.size() > best->second) {
                best = {{ProtocolId{static_cast<std::uint8_t>(i)}, n.size()}};
            }
        }
    }
    if (!best && names.names.empty() && !text.empty() && text[0] >= 'a' && text[0] <= 'z') {
        best = {{ProtocolId{static_cast<std::uint8_t>(text[0] - 'a')}, 1}};
    }
    return best;
}

}  // namespace

ProtocolStack parse_stack(std::string_view text, const ProtocolNames& names) {
    std::vector<ProtocolId> items;
    std::string_view rest = text;
    while (!rest.empty()) {
        auto m = match_protocol(rest, names);
        if (!m) {
            throw std::invalid_argument("parse_stack: unknown protocol name in \"" +
                                        std::string(text) + "\"");
        }
        items.push_back(m->first);
        rest.remove_prefix(m->second);
    }
    if (items.empty()) {
        throw std::invalid_argument("parse_stack: empty stack");
    }
    return ProtocolStack(std::move(items));
}

AdaptationFunction parse_function(std::string_view text, const ProtocolNames& names) {
    const std::string_view original = text;
    bool dec = false;
    if (text.starts_with("~(") && text.ends_with(")")) {
        dec = true;
        text = text.substr(2, text.size() - 3);
    }
    const auto arrow = text.find("->");
    if (arrow == std::string_view::npos) {
        throw std::invalid_argument("parse_function: missing '->' in \"" +
                                    std::string(original) + "\"");
    }
    const std::string_view left = text.substr(0, arrow);
    const std::string_view right = text.substr(arrow + 2);

    const auto x = names.find(left);
    if (!x) {
        throw std::invalid_argument("parse_function: unknown protocol \"" + std::string(left) +
                                    "\"");
    }
    // Encapsulation renders as x -> x y; anything else is a conversion.
    const std::string xname = names.name_of(*x);
    if (right.size() > xname.size() && right.substr(0, xname.size()) == xname) {
        const auto y = names.find(right.substr(xname.size()));
        if (y) {
            return dec ? AdaptationFunction::decapsulation(*x, *y)
                       : AdaptationFunction::encapsulation(*x, *y);
        }
    }
    if (dec) {
        throw std::invalid_argument("parse_function: malformed decapsulation \"" +
                                    std::string(original) + "\"");
    }
    const auto y = names.find(right);
    if (!y) {
        throw std::invalid_argument("parse_function: unknown protocol \"" + std::string(right) +
                                    "\"");
    }
    return AdaptationFunction::conversion(*x, *y);
}

}  // namespace stackroute
