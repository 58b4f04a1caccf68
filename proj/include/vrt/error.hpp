#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>
#include <string>

namespace vrt {

/// Base for every data-level failure the library reports. The CLI maps
/// these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two masks (or a mask and an image) disagree on height/width.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Run lengths that do not describe an H x W image.
class RleError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

/// [SEG] token count differs from the number of masks supplied with the text.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed <ver>/<vea> object tags.
class TagGrammarError : public Error {
 public:
  using Error::Error;
};

/// Manifest, predictions or request files that violate their schema or
/// the benchmark invariants.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace vrt
