// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string_view>

namespace starmm {

// An element algebra (S, add, mul, zero, one). Instances are stateless types;
// kernels are generic over them at compile time.
template <class S>
concept Semiring = requires(typename S::value_type a, typename S::value_type b) {
  typename S::value_type;
  { S::zero() } -> std::same_as<typename S::value_type>;
  { S::one() } -> std::same_as<typename S::value_type>;
  { S::add(a, b) } -> std::same_as<typename S::value_type>;
  { S::mul(a, b) } -> std::same_as<typename S::value_type>;
  { S::name } -> std::convertible_to<std::string_view>;
  { S::exact } -> std::convertible_to<bool>;
};

// A semiring whose add has an inverse. Required by Strassen-type schemes.
template <class S>
concept Ring = Semiring<S> && requires(typename S::value_type a, typename S::value_type b) {
  { S::sub(a, b) } -> std::same_as<typename S::value_type>;
};

// Additive inverse of one, used to realize "subtract P" as "add (-1) * P".
template <Ring S>
constexpr typename S::value_type minus_one() {
  return S::sub(S::zero(), S::one());
}

struct IntRing {
  using value_type = std::int64_t;
  static constexpr std::string_view name = "int";
  static constexpr bool exact = true;
  static constexpr value_type zero() { return 0; }
  static constexpr value_type one() { return 1; }
  static constexpr value_type add(value_type a, value_type b) { return a + b; }
  static constexpr value_type mul(value_type a, value_type b) { return a * b; }
  static constexpr value_type sub(value_type a, value_type b) { return a - b; }
};

struct FloatRing {
  using value_type = double;
  static constexpr std::string_view name = "float";
  static constexpr bool exact = false;
  static constexpr value_type zero() { return 0.0; }
  static constexpr value_type one() { return 1.0; }
  static constexpr value_type add(value_type a, value_type b) { return a + b; }
  static constexpr value_type mul(value_type a, value_type b) { return a * b; }
  static constexpr value_type sub(value_type a, value_type b) { return a - b; }
};

// (min, +) over doubles. +inf is the additive identity; integer-valued inputs
// keep every result exact, so fold order does not matter.
struct Tropical {
  using value_type = double;
  static constexpr std::string_view name = "tropical";
  static constexpr bool exact = true;
  static constexpr value_type zero() { return std::numeric_limits<double>::infinity(); }
  static constexpr value_type one() { return 0.0; }
  static constexpr value_type add(value_type a, value_type b) { return std::min(a, b); }
  static constexpr value_type mul(value_type a, value_type b) { return a + b; }
};

static_assert(Ring<IntRing>);
static_assert(Ring<FloatRing>);
static_assert(Semiring<Tropical> && !Ring<Tropical>);
static_assert(sizeof(IntRing::value_type) == 8 && sizeof(FloatRing::value_type) == 8 &&
              sizeof(Tropical::value_type) == 8);

enum class SemiringId { Int, Float, Tropical };

constexpr std::string_view to_string(SemiringId id) {
  switch (id) {
    case SemiringId::Int: return IntRing::name;
    case SemiringId::Float: return FloatRing::name;
    case SemiringId::Tropical: return Tropical::name;
  }
  return "?";
}

template <class S>
constexpr SemiringId semiring_id() {
  if constexpr (std::same_as<S, IntRing>) return SemiringId::Int;
  else if constexpr (std::same_as<S, FloatRing>) return SemiringId::Float;
  else return SemiringId::Tropical;
}

// Calls f.template operator()<S>() for the runtime-selected semiring.
template <class F>
decltype(auto) dispatch_semiring(SemiringId id, F&& f) {
  switch (id) {
    case SemiringId::Int: return f.template operator()<IntRing>();
    case SemiringId::Float: return f.template operator()<FloatRing>();
    case SemiringId::Tropical: break;
  }
  return f.template operator()<Tropical>();
}

}  // namespace starmm
