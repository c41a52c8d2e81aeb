#pragma once

#include <stdexcept>
#include <string>

namespace stressfuse {

// Root of every error raised by the library. Each subclass names the
// contract that was violated so callers and tests can match on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class UnsupportedError : public Error { public: using Error::Error; };
class AlignmentError : public Error { public: using Error::Error; };
class SpecError : public Error { public: using Error::Error; };
class LengthError : public Error { public: using Error::Error; };
class LabelError : public Error { public: using Error::Error; };
class DegenerateFrameError : public Error { public: using Error::Error; };
class EmptyMatrixError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class NumericError : public Error { public: using Error::Error; };
class DataError : public Error { public: using Error::Error; };
class FoldError : public Error { public: using Error::Error; };
class MetricError : public Error { public: using Error::Error; };
class LeakageError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class DependencyError : public Error { public: using Error::Error; };
class InternalError : public Error { public: using Error::Error; };

}  // namespace stressfuse
