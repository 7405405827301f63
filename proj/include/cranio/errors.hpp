#ifndef CRANIO_ERRORS_HPP
#define CRANIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cranio {

// Exit-code categories used by the CLI: config=2, data=3, runtime=4.
enum class ErrorCategory : int { config = 2, data = 3, runtime = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what)
        : std::runtime_error(what), cat_(cat) {}
    ErrorCategory category() const { return cat_; }
    const char* category_name() const {
        switch (cat_) {
            case ErrorCategory::config: return "config";
            case ErrorCategory::data: return "data";
            default: return "runtime";
        }
    }

private:
    ErrorCategory cat_;
};

struct EmptyVolume : Error {
    explicit EmptyVolume(const std::string& what = "volume has no nonzero voxels")
        : Error(ErrorCategory::data, "EmptyVolume: " + what) {}
};

struct GeometryMismatch : Error {
    explicit GeometryMismatch(const std::string& what)
        : Error(ErrorCategory::data, "GeometryMismatch: " + what) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what)
        : Error(ErrorCategory::data, "ShapeMismatch: " + what) {}
};

struct UnsupportedNrrdFeature : Error {
    explicit UnsupportedNrrdFeature(const std::string& what)
        : Error(ErrorCategory::data, "UnsupportedNrrdFeature: " + what) {}
};

struct CorruptFile : Error {
    explicit CorruptFile(const std::string& what)
        : Error(ErrorCategory::data, "CorruptFile: " + what) {}
};

struct MissingFile : Error {
    explicit MissingFile(const std::string& what)
        : Error(ErrorCategory::data, "MissingFile: " + what) {}
};

struct EmptyDataset : Error {
    explicit EmptyDataset(const std::string& what = "dataset contains no cases")
        : Error(ErrorCategory::data, "EmptyDataset: " + what) {}
};

struct DegenerateConfig : Error {
    explicit DegenerateConfig(const std::string& what)
        : Error(ErrorCategory::config, "DegenerateConfig: " + what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what)
        : Error(ErrorCategory::config, "ConfigError: " + what) {}
};

struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& what)
        : Error(ErrorCategory::runtime, "NonFiniteLoss: " + what) {}
};

struct NonFiniteCost : Error {
    explicit NonFiniteCost(const std::string& what)
        : Error(ErrorCategory::runtime, "NonFiniteCost: " + what) {}
};

struct GenerationDegenerate : Error {
    explicit GenerationDegenerate(const std::string& what)
        : Error(ErrorCategory::runtime, "GenerationDegenerate: " + what) {}
};

} // namespace cranio

#endif
