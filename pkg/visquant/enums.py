"""
MIT License

Copyright (c) 2024-Present visquant contributors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""
import enum

__all__ = ("QuantifierLabel", "Architecture", "SplitSetting", "AnalysisKind")


class QuantifierLabel(enum.IntEnum):
    """Enum representing the ordinal quantifier scale.

    The integer value of each member is its ordinal position, so members compare in the same order
    as the linguistic scale: ``no < few < some < most < all``.

    Attributes
    ----------
    no
        The restrictor and scope sets do not intersect.
    few
        At most 17% of the restrictor set holds the scope property.
    some
        Strictly between 17% and 70% of the restrictor set holds the scope property.
    most
        At least 70%, but not all, of the restrictor set holds the scope property.
    all
        Every member of the restrictor set holds the scope property.
    """

    no = 0
    few = 1
    some = 2
    most = 3
    all = 4

    @property
    def word(self) -> str:
        """The lowercase word used when serializing this label."""
        return self.name

    @classmethod
    def from_word(cls, word: str) -> "QuantifierLabel":
        try:
            return cls[word.strip().lower()]
        except KeyError:
            raise ValueError(f'"{word}" is not a quantifier. Expected one of no|few|some|most|all.') from None


class Architecture(enum.Enum):
    """Enum representing the classifier architectures.

    Attributes
    ----------
    BOW
        The language-only bag-of-words baseline.
    CNN_BOW
        Bag-of-words concatenated with the concatenation of every slot vector.
    LSTM
        The language-only LSTM over the two query words.
    CNN_LSTM
        A visual LSTM over the slots combined with the language-only LSTM.
    SAN
        The stacked attention network.
    QMN
        The quantification memory network.
    QSAN
        The quantification stacked attention network.
    DOT_CNN
        The one convolution layer classifier used for dot images.
    """

    BOW = "bow"
    CNN_BOW = "cnn-bow"
    LSTM = "lstm"
    CNN_LSTM = "cnn-lstm"
    SAN = "san"
    QMN = "qmn"
    QSAN = "qsan"
    DOT_CNN = "dot-cnn"

    @classmethod
    def parse(cls, value: str) -> "Architecture":
        cleaned: str = value.strip().lower().replace("+", "-").replace("_", "-")

        for member in cls:
            if member.value == cleaned:
                return member

        raise ValueError(f'Unknown architecture "{value}". Expected one of {", ".join(m.value for m in cls)}.')

    @property
    def uses_scenario(self) -> bool:
        return self not in (Architecture.BOW, Architecture.LSTM, Architecture.DOT_CNN)


class SplitSetting(enum.Enum):
    """Enum representing the generalization settings.

    Attributes
    ----------
    UNC
        Uncontrolled. Datapoints are split at random; scenario-query combinations are never shared.
    UnsObj
        Unseen objects. Held-out restrictor objects never appear as restrictor in training.
    UnsProp
        Unseen properties. Held-out scope properties never appear as scope in training.
    UnsQue
        Unseen queries. Held-out object-property pairs never appear in training, their words do.
    """

    UNC = "unc"
    UnsObj = "unsobj"
    UnsProp = "unsprop"
    UnsQue = "unsque"

    @classmethod
    def parse(cls, value: str) -> "SplitSetting":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f'Unknown setting "{value}". Expected one of unc|unsobj|unsprop|unsque.') from None


class AnalysisKind(enum.Enum):
    """Enum representing the analyses available through ``analyze``.

    Attributes
    ----------
    ratio
        Accuracy per ratio bin within each quantifier range.
    distractor
        Accuracy per number of distractors carrying the scope property.
    confusion
        The confusion matrix and the adjacency histogram of errors.
    span
        Accuracy per exact ratio across the whole 0-100% span.
    """

    ratio = "ratio"
    distractor = "distractor"
    confusion = "confusion"
    span = "span"
