#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mvfill {

// Base of every library error. The category decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { kConfig, kData, kNumeric };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const { return category_; }

 private:
  Category category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(Category::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(Category::kNumeric, what) {}
};

class ZeroVector : public NumericError {
 public:
  ZeroVector() : NumericError("zero vector cannot be normalized") {}
};

class DimensionMismatch : public DataError {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : DataError("dimension mismatch: expected " + std::to_string(expected) +
                  ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class LengthMismatch : public DataError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : DataError("length mismatch: " + std::to_string(a) + " vs " +
                  std::to_string(b)) {}
};

class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class DegenerateBatch : public DataError {
 public:
  explicit DegenerateBatch(std::size_t classes)
      : DataError("triplet batch needs at least 2 classes, got " +
                  std::to_string(classes)) {}
};

class MissingClassView : public DataError {
 public:
  MissingClassView(int label, int view)
      : DataError("class " + std::to_string(label) + " has no records in view " +
                  std::to_string(view)),
        label_(label),
        view_(view) {}

  int label() const { return label_; }
  int view() const { return view_; }

 private:
  int label_;
  int view_;
};

class EmptyIndex : public DataError {
 public:
  EmptyIndex() : DataError("retrieval index is empty") {}
};

class EmptyList : public DataError {
 public:
  EmptyList() : DataError("cannot fuse an empty list") {}
};

class AllZeroProduct : public NumericError {
 public:
  AllZeroProduct()
      : NumericError("every class has a zero factor in the product fusion") {}
};

class MissingScore : public DataError {
 public:
  explicit MissingScore(const std::string& id)
      : DataError("no score vector for id '" + id + "'"), id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class ClassTooSmall : public DataError {
 public:
  ClassTooSmall(int label, std::size_t count)
      : DataError("class " + std::to_string(label) + " has only " +
                  std::to_string(count) + " samples; folds need at least 10") {}
};

class EmptyQuerySet : public DataError {
 public:
  EmptyQuerySet() : DataError("query set is empty") {}
};

class StaleCache : public DataError {
 public:
  StaleCache()
      : DataError("index cache was built with a different projection head") {}
};

}  // namespace mvfill
