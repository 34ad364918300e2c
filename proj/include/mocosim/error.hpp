#pragma once

#include <stdexcept>
#include <string>

namespace mocosim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate an operation's preconditions (bad sizes, mismatched dims, non-finite data).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Filesystem or stream failure. The message carries the offending path.
class IoError : public Error
{
public:
  IoError(std::string const &path, std::string const &what)
    : Error(path + ": " + what)
    , path_(path)
  {
  }

  std::string const &path() const noexcept { return path_; }

private:
  std::string path_;
};

/// A file was readable but its contents do not follow the expected layout.
class FormatError : public Error
{
public:
  enum class Kind
  {
    BadMagic,
    BadDtype,
    BadHeader,
    Truncated,
    TrailingData,
    Unsupported,
  };

  FormatError(Kind kind, std::string const &path, std::string const &what)
    : Error(path + ": " + what)
    , kind_(kind)
  {
  }

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

} // namespace mocosim
